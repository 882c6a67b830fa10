// Boltzmann machines on p-bits: quadratic (Ising) and tabulated energies,
// sequential Gibbs and Metropolis-Hastings sampling, exact enumeration,
// annealing, invertible logic and max-cut.
//
// Energy convention: E(s) = -sum_{i<j} W_ij s_i s_j - sum_i h_i s_i, each
// unordered pair counted once. With spins in {0,1} the p-bit input of spin i
// is I_i = beta * (sum_j W_ij s_j + h_i); with spins in {-1,+1} it carries an
// extra factor 2 so that sigmoid(I_i) = P(s_i = +1 | rest).

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcomp/engine.hpp"
#include "pcomp/pbit.hpp"
#include "pcomp/rng.hpp"
#include "pcomp/schedule.hpp"

namespace pcomp::ising {

using Spins = std::vector<std::int8_t>;

enum class Convention { Binary, Bipolar };

inline int low_spin(Convention c) { return c == Convention::Binary ? 0 : -1; }
inline int spin_from_bit(Convention c, unsigned bit) { return bit ? 1 : low_spin(c); }

struct Coupling {
  std::size_t j;
  double w;
};

class IsingModel {
 public:
  explicit IsingModel(std::size_t n, Convention convention = Convention::Binary, double beta = 1.0)
      : convention_(convention), beta_(beta), rows_(n), h_(n, 0.0) {
    set_beta(beta);
  }

  /// Adds w to W_ij and W_ji.
  void add_coupling(std::size_t i, std::size_t j, double w) {
    if (i == j) throw std::invalid_argument("self-coupling W_ii is not allowed");
    if (i >= size() || j >= size()) throw std::out_of_range("coupling index out of range");
    accumulate(i, j, w);
    accumulate(j, i, w);
  }

  void set_bias(std::size_t i, double h) { h_.at(i) = h; }
  void add_bias(std::size_t i, double h) { h_.at(i) += h; }
  void set_beta(double beta) {
    if (!(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
    beta_ = beta;
  }

  std::size_t size() const { return rows_.size(); }
  double beta() const { return beta_; }
  Convention convention() const { return convention_; }
  double bias(std::size_t i) const { return h_.at(i); }
  std::span<const Coupling> neighbors(std::size_t i) const { return rows_.at(i); }

  double coupling(std::size_t i, std::size_t j) const {
    for (const Coupling& c : rows_.at(i))
      if (c.j == j) return c.w;
    return 0.0;
  }

  /// Sum_j W_ij s_j + h_i.
  double field(const Spins& s, std::size_t i) const {
    double f = h_[i];
    for (const Coupling& c : rows_[i]) f += c.w * s[c.j];
    return f;
  }

  double energy(const Spins& s) const {
    check(s);
    double e = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      for (const Coupling& c : rows_[i])
        if (c.j > i) e -= c.w * s[i] * s[c.j];
      e -= h_[i] * s[i];
    }
    return e;
  }

  /// E(s_i = low) - E(s_i = high), the rest of s held fixed.
  double energy_gap(const Spins& s, std::size_t i) const {
    const double f = field(s, i);
    return convention_ == Convention::Binary ? f : 2.0 * f;
  }

  void check(const Spins& s) const {
    if (s.size() != size())
      throw std::invalid_argument("spin vector has " + std::to_string(s.size()) + " entries, model has " +
                                  std::to_string(size()));
    const int lo = low_spin(convention_);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] != lo && s[i] != 1)
        throw std::invalid_argument("spin " + std::to_string(i) + " = " + std::to_string(s[i]) + " is not a " +
                                    (convention_ == Convention::Binary ? "{0,1}" : "{-1,+1}") + " value");
  }

 private:
  void accumulate(std::size_t i, std::size_t j, double w) {
    for (Coupling& c : rows_[i])
      if (c.j == j) {
        c.w += w;
        return;
      }
    rows_[i].push_back({j, w});
  }

  Convention convention_;
  double beta_;
  std::vector<std::vector<Coupling>> rows_;
  std::vector<double> h_;
};

struct ConvertedModel {
  IsingModel model;
  double offset = 0;  ///< E_original(s) = E_converted(s') + offset
};

/// Same energy landscape in the other spin convention, s_pm = 2 s_01 - 1.
inline ConvertedModel convert(const IsingModel& m, Convention target) {
  const std::size_t n = m.size();
  ConvertedModel out{IsingModel(n, target, m.beta()), 0.0};
  if (target == m.convention()) {
    out.model = m;
    return out;
  }
  const bool to_bipolar = target == Convention::Bipolar;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (const Coupling& c : m.neighbors(i)) {
      row += c.w;
      if (c.j > i) {
        out.model.add_coupling(i, c.j, to_bipolar ? c.w / 4 : 4 * c.w);
        out.offset += to_bipolar ? -c.w / 4 : -c.w;
      }
    }
    out.model.set_bias(i, to_bipolar ? m.bias(i) / 2 + row / 4 : 2 * m.bias(i) - 2 * row);
    out.offset += to_bipolar ? -m.bias(i) / 2 : m.bias(i);
  }
  return out;
}

/// Arbitrary energy given as a table over all 2^n binary states, at beta = 1.
/// State index: bit i of the index is spin i.
class TabulatedModel {
 public:
  explicit TabulatedModel(std::vector<double> energies, double beta = 1.0) : energies_(std::move(energies)), beta_(beta) {
    const std::size_t m = energies_.size();
    if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("energy table size must be a power of two >= 2");
    n_ = static_cast<std::size_t>(std::countr_zero(m));
  }

  std::size_t size() const { return n_; }
  double beta() const { return beta_; }
  Convention convention() const { return Convention::Binary; }
  const std::vector<double>& table() const { return energies_; }

  static std::size_t index(const Spins& s) {
    std::size_t a = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i]) a |= std::size_t{1} << i;
    return a;
  }

  double energy(const Spins& s) const { return energies_.at(index(s)); }

  double energy_gap(const Spins& s, std::size_t i) const {
    const std::size_t a = index(s) & ~(std::size_t{1} << i);
    return energies_[a] - energies_[a | (std::size_t{1} << i)];
  }

 private:
  std::vector<double> energies_;
  std::size_t n_;
  double beta_;
};

template <typename M>
concept EnergyModel = requires(const M& m, const Spins& s, std::size_t i) {
  { m.size() } -> std::convertible_to<std::size_t>;
  { m.beta() } -> std::convertible_to<double>;
  { m.convention() } -> std::same_as<Convention>;
  { m.energy(s) } -> std::convertible_to<double>;
  { m.energy_gap(s, i) } -> std::convertible_to<double>;
};

template <EnergyModel M>
double energy(const M& model, const Spins& s) {
  return model.energy(s);
}

/// p-bit input of spin i: beta * (E(s_i low) - E(s_i high)).
template <EnergyModel M>
double local_field(const M& model, const Spins& s, std::size_t i) {
  if (i >= model.size()) throw std::out_of_range("spin index out of range");
  return model.beta() * model.energy_gap(s, i);
}

/// Spins held at fixed values (in the model's convention).
class ClampSet {
 public:
  ClampSet() = default;
  ClampSet(std::initializer_list<std::pair<const std::size_t, int>> init) : fixed_(init) {}

  void clamp(std::size_t i, int value) { fixed_[i] = value; }
  bool contains(std::size_t i) const { return fixed_.contains(i); }
  bool empty() const { return fixed_.empty(); }
  const std::map<std::size_t, int>& values() const { return fixed_; }

  void apply(Spins& s) const {
    for (auto [i, v] : fixed_) s.at(i) = static_cast<std::int8_t>(v);
  }

  std::vector<std::size_t> free_spins(std::size_t n) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (!contains(i)) out.push_back(i);
    return out;
  }

 private:
  std::map<std::size_t, int> fixed_;
};

enum class SweepOrder { Sequential, RandomScan };

namespace detail {

template <EnergyModel M, UniformSource Rng>
void gibbs_sweep_at(const M& model, double beta, Spins& s, const ClampSet& clamps, Rng& rng, SweepOrder order) {
  const Convention c = model.convention();
  const std::size_t n = model.size();
  if (order == SweepOrder::Sequential) {
    for (std::size_t i = 0; i < n; ++i) {
      if (clamps.contains(i)) continue;
      const double input = beta * model.energy_gap(s, i);
      s[i] = static_cast<std::int8_t>(spin_from_bit(c, pbit_sample(input, rng.uniform01())));
    }
    return;
  }
  const auto free = clamps.free_spins(n);
  if (free.empty()) return;
  for (std::size_t k = 0; k < free.size(); ++k) {
    const std::size_t i = free[uniform_index(rng, free.size())];
    const double input = beta * model.energy_gap(s, i);
    s[i] = static_cast<std::int8_t>(spin_from_bit(c, pbit_sample(input, rng.uniform01())));
  }
}

}  // namespace detail

/// One sweep over all unclamped spins; each update sees the earlier ones.
template <EnergyModel M, UniformSource Rng>
void gibbs_sweep(const M& model, Spins& s, const ClampSet& clamps, Rng& rng,
                 SweepOrder order = SweepOrder::Sequential) {
  detail::gibbs_sweep_at(model, model.beta(), s, clamps, rng, order);
}

template <EnergyModel M, UniformSource Rng>
void gibbs_sweep(const M& model, Spins& s, Rng& rng) {
  detail::gibbs_sweep_at(model, model.beta(), s, ClampSet{}, rng, SweepOrder::Sequential);
}

/// Single uniformly chosen spin flip accepted with min(1, exp(-beta dE)).
/// Draws two uniforms per call (site, acceptance). Returns whether it flipped.
template <EnergyModel M, UniformSource Rng>
bool mh_step(const M& model, Spins& s, Rng& rng, const ClampSet& clamps = {}) {
  std::size_t i;
  if (clamps.empty()) {
    i = uniform_index(rng, model.size());
  } else {
    const auto free = clamps.free_spins(model.size());
    if (free.empty()) return false;
    i = free[uniform_index(rng, free.size())];
  }
  const double gap = model.energy_gap(s, i);
  const bool is_high = s[i] == 1;
  const double delta_e = is_high ? gap : -gap;
  const double u = rng.uniform01();
  if (!(delta_e <= 0 || u < std::exp(-model.beta() * delta_e))) return false;
  s[i] = static_cast<std::int8_t>(is_high ? low_spin(model.convention()) : 1);
  return true;
}

inline constexpr std::size_t kMaxEnumerationSpins = 20;

/// State index a <-> spins: bit i of a set means spin i is high.
inline Spins spins_from_index(std::size_t a, std::size_t n, Convention c) {
  Spins s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<std::int8_t>(spin_from_bit(c, (a >> i) & 1u));
  return s;
}

inline std::size_t index_from_spins(const Spins& s) {
  std::size_t a = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == 1) a |= std::size_t{1} << i;
  return a;
}

/// exp(-beta E_a) / Z over all 2^n states.
template <EnergyModel M>
std::vector<double> exact_boltzmann(const M& model) {
  const std::size_t n = model.size();
  if (n > kMaxEnumerationSpins) throw std::length_error("exact enumeration refuses more than 20 spins");
  const std::size_t states = std::size_t{1} << n;
  std::vector<double> logw(states);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < states; ++a) {
    logw[a] = -model.beta() * model.energy(spins_from_index(a, n, model.convention()));
    top = std::max(top, logw[a]);
  }
  double z = 0;
  for (double& w : logw) {
    w = std::exp(w - top);
    z += w;
  }
  for (double& w : logw) w /= z;
  return logw;
}

/// Lowest energy over all states and one state attaining it.
template <EnergyModel M>
std::pair<double, Spins> exact_ground_state(const M& model) {
  const std::size_t n = model.size();
  if (n > kMaxEnumerationSpins) throw std::length_error("exact enumeration refuses more than 20 spins");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t a = 0; a < (std::size_t{1} << n); ++a) {
    const double e = model.energy(spins_from_index(a, n, model.convention()));
    if (e < best) {
      best = e;
      arg = a;
    }
  }
  return {best, spins_from_index(arg, n, model.convention())};
}

/// Tabulated model with beta * E = -ln P, so that its Boltzmann law is P.
inline TabulatedModel from_target_distribution(const std::vector<double>& p) {
  double total = 0;
  for (double x : p) {
    if (!(x > 0) || !std::isfinite(x)) throw std::invalid_argument("target probabilities must be strictly positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("target probabilities must sum to 1");
  std::vector<double> e(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) e[a] = -std::log(p[a]);
  return TabulatedModel(std::move(e), 1.0);
}

// ---------------------------------------------------------------------------
// Invertible logic

struct InvertibleGate {
  IsingModel model;
  double ground_energy = 0;
  double gap = 0;  ///< lowest non-truth-table energy minus ground energy
};

/// Three-spin AND gate (a, b, c = a AND b) in the {0,1} convention.
///
/// Searches integer couplings and biases in [-3, 3] for parameters that make
/// the four truth-table rows exactly degenerate ground states, keeping the
/// largest gap to every other row (ties go to the smallest L1 norm, then
/// to the first found).
inline InvertibleGate invertible_and_gate(double beta = 1.0) {
  constexpr int lo = -3, hi = 3;
  auto is_truth = [](unsigned a) {
    const unsigned x = a & 1u, y = (a >> 1) & 1u, z = (a >> 2) & 1u;
    return z == (x & y);
  };
  double best_gap = 0, best_ground = 0;
  int best_norm = std::numeric_limits<int>::max();
  std::array<int, 6> best{};
  bool found = false;
  std::array<int, 6> p{};  // W_ab, W_ac, W_bc, h_a, h_b, h_c
  std::size_t tried = 0;
  for (p[0] = lo; p[0] <= hi; ++p[0])
    for (p[1] = lo; p[1] <= hi; ++p[1])
      for (p[2] = lo; p[2] <= hi; ++p[2])
        for (p[3] = lo; p[3] <= hi; ++p[3])
          for (p[4] = lo; p[4] <= hi; ++p[4])
            for (p[5] = lo; p[5] <= hi; ++p[5]) {
              ++tried;
              std::optional<int> ground;
              int other = std::numeric_limits<int>::max();
              bool degenerate = true;
              for (unsigned a = 0; a < 8; ++a) {
                const int x = a & 1, y = (a >> 1) & 1, z = (a >> 2) & 1;
                const int e = -(p[0] * x * y + p[1] * x * z + p[2] * y * z) - (p[3] * x + p[4] * y + p[5] * z);
                if (is_truth(a)) {
                  if (!ground) ground = e;
                  else if (*ground != e) degenerate = false;
                } else {
                  other = std::min(other, e);
                }
              }
              if (!degenerate) continue;
              const int gap = other - *ground;
              if (gap <= 0) continue;
              const int norm = std::abs(p[0]) + std::abs(p[1]) + std::abs(p[2]) + std::abs(p[3]) + std::abs(p[4]) +
                               std::abs(p[5]);
              if (!found || gap > best_gap || (gap == best_gap && norm < best_norm)) {
                found = true;
                best_gap = gap;
                best_norm = norm;
                best_ground = *ground;
                best = p;
              }
            }
  if (!found)
    throw std::runtime_error("AND gate search failed over " + std::to_string(tried) + " parameter sets");
  IsingModel m(3, Convention::Binary, beta);
  if (best[0]) m.add_coupling(0, 1, best[0]);
  if (best[1]) m.add_coupling(0, 2, best[1]);
  if (best[2]) m.add_coupling(1, 2, best[2]);
  for (std::size_t i = 0; i < 3; ++i) m.set_bias(i, best[3 + i]);
  return {std::move(m), best_ground, best_gap};
}

// ---------------------------------------------------------------------------
// Annealing and max-cut

struct AnnealResult {
  Spins state;
  double energy = 0;
};

struct NoObserver {
  void operator()(std::size_t, double, const Spins&, double) const {}
};

/// Gibbs sweeps with beta following `schedule` from a uniformly random start;
/// returns the lowest-energy state visited. `observer(sweep, beta, spins,
/// energy)` runs after every sweep.
template <UniformSource Rng, typename Observer = NoObserver>
AnnealResult anneal(const IsingModel& model, const Schedule& schedule, std::size_t sweeps, Rng& rng,
                    const ClampSet& clamps = {}, Observer observer = {}) {
  if (!schedule.nondecreasing()) throw std::invalid_argument("anneal schedule must be nondecreasing");
  const Convention c = model.convention();
  Spins s(model.size());
  for (auto& x : s) x = static_cast<std::int8_t>(spin_from_bit(c, rng.uniform01() < 0.5));
  clamps.apply(s);
  AnnealResult best{s, model.energy(s)};
  for (std::size_t t = 0; t < sweeps; ++t) {
    const double beta = schedule.at(t, sweeps);
    detail::gibbs_sweep_at(model, beta, s, clamps, rng, SweepOrder::Sequential);
    const double e = model.energy(s);
    observer(t, beta, s, e);
    if (e < best.energy) best = {s, e};
  }
  return best;
}

struct WeightedEdge {
  std::size_t i, j;
  double w;
};

struct MaxCut {
  IsingModel model;
  std::vector<WeightedEdge> edges;
  double total_weight = 0;

  double cut_value(const Spins& s) const {
    double cut = 0;
    for (const auto& e : edges) cut += e.w * (1 - s.at(e.i) * s.at(e.j)) / 2.0;
    return cut;
  }

  /// cut(s) = (total edge weight - E(s)) / 2 for the antiferromagnetic mapping.
  double cut_from_energy(double energy) const { return (total_weight - energy) / 2.0; }
};

/// Bipolar antiferromagnet W_ij = -w_ij, h = 0; minimizing E maximizes the cut.
inline MaxCut maxcut_to_ising(std::size_t n, const std::vector<WeightedEdge>& edges, double beta = 1.0) {
  MaxCut mc{IsingModel(n, Convention::Bipolar, beta), edges, 0.0};
  for (const auto& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("max-cut graph has a self-loop at " + std::to_string(e.i));
    mc.model.add_coupling(e.i, e.j, -e.w);
    mc.total_weight += e.w;
  }
  return mc;
}

// ---------------------------------------------------------------------------
// Engine kernel: one p-bit per clock, visiting unclamped spins in index
// order. After every full pass the spins equal those of gibbs_sweep driven by
// the same uniform stream from the all-low state.

class GibbsPBitKernel {
 public:
  struct State {
    Spins spins;
    std::size_t cursor = 0;
    double energy = 0;
  };

  explicit GibbsPBitKernel(const IsingModel& model, ClampSet clamps = {})
      : model_(&model), clamps_(std::move(clamps)), free_(clamps_.free_spins(model.size())) {
    if (free_.empty()) throw std::invalid_argument("every spin is clamped");
  }

  State initial_state() const {
    State st{Spins(model_->size(), static_cast<std::int8_t>(low_spin(model_->convention()))), 0, 0.0};
    clamps_.apply(st.spins);
    st.energy = model_->energy(st.spins);
    return st;
  }

  std::vector<double> initial_inputs(const State& st) const {
    return {local_field(*model_, st.spins, free_[st.cursor])};
  }

  std::vector<std::string> observable_names() const { return {"energy", "magnetization"}; }

  void step(const PBitVector& pbits, State& st, engine::StepOutput& out) const {
    const std::size_t i = free_[st.cursor];
    const int next = spin_from_bit(model_->convention(), pbits[0]);
    if (next != st.spins[i]) {
      st.energy -= (next - st.spins[i]) * model_->field(st.spins, i);
      st.spins[i] = static_cast<std::int8_t>(next);
    }
    st.cursor = (st.cursor + 1) % free_.size();
    out.next_inputs.assign(1, local_field(*model_, st.spins, free_[st.cursor]));
    double mag = 0;
    for (auto x : st.spins) mag += x;
    out.observables = {st.energy, mag / static_cast<double>(st.spins.size())};
  }

 private:
  const IsingModel* model_;
  ClampSet clamps_;
  std::vector<std::size_t> free_;
};

// ---------------------------------------------------------------------------
// Model file
//
//   convention binary|bipolar
//   beta <value>
//   n <spins>            (optional; otherwise 1 + largest index)
//   i j W_ij             (one coupling per line)
//   bias i h_i
//
// '#' starts a comment.

inline IsingModel parse_model(std::istream& in) {
  Convention conv = Convention::Binary;
  double beta = 1.0;
  std::optional<std::size_t> n;
  std::vector<WeightedEdge> couplings;
  std::vector<std::pair<std::size_t, double>> biases;
  std::size_t max_index = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("model file line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "convention") {
      std::string v;
      ls >> v;
      if (v == "binary") conv = Convention::Binary;
      else if (v == "bipolar") conv = Convention::Bipolar;
      else fail("convention must be binary or bipolar");
    } else if (first == "beta") {
      if (!(ls >> beta)) fail("bad beta");
    } else if (first == "n") {
      std::size_t v;
      if (!(ls >> v)) fail("bad n");
      n = v;
    } else if (first == "bias") {
      std::size_t i;
      double h;
      if (!(ls >> i >> h)) fail("bias needs index and value");
      biases.emplace_back(i, h);
      max_index = std::max(max_index, i);
      any = true;
    } else {
      std::size_t i, j;
      double w;
      std::istringstream es(line);
      if (!(es >> i >> j >> w)) fail("expected 'i j W'");
      couplings.push_back({i, j, w});
      max_index = std::max({max_index, i, j});
      any = true;
    }
  }
  const std::size_t size = n.value_or(any ? max_index + 1 : 0);
  if (size == 0) throw std::runtime_error("model file declares no spins");
  if (any && max_index >= size) throw std::runtime_error("model file index exceeds n");
  IsingModel m(size, conv, beta);
  for (const auto& c : couplings) m.add_coupling(c.i, c.j, c.w);
  for (auto [i, h] : biases) m.add_bias(i, h);
  return m;
}

inline void write_model(std::ostream& out, const IsingModel& m) {
  const auto old = out.precision(17);
  out << "convention " << (m.convention() == Convention::Binary ? "binary" : "bipolar") << '\n'
      << "beta " << m.beta() << '\n'
      << "n " << m.size() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const Coupling& c : m.neighbors(i))
      if (c.j > i) out << i << ' ' << c.j << ' ' << c.w << '\n';
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.bias(i) != 0) out << "bias " << i << ' ' << m.bias(i) << '\n';
  out.precision(old);
}

}  // namespace pcomp::ising
