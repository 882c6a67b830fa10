// 0/1 knapsack by Markov chain Monte Carlo over two-item moves, with an exact
// dynamic-programming baseline.
//
// The chain targets pi(s) ~ exp(beta * V(s)) restricted to feasible
// selections (W(s) <= C); infeasible candidates are rejected outright. Two-item
// flips preserve the parity of the number of selected items, so a chain only
// visits the parity class of its start (the empty selection is even).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcomp/rng.hpp"
#include "pcomp/schedule.hpp"

namespace pcomp::knapsack {

struct Instance {
  std::vector<double> values;
  std::vector<double> weights;
  double capacity = 0;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (values.size() != weights.size()) throw std::invalid_argument("values and weights differ in length");
    if (!(capacity >= 0) || !std::isfinite(capacity)) throw std::invalid_argument("capacity must be finite and >= 0");
    for (std::size_t m = 0; m < size(); ++m)
      if (!(values[m] > 0) || !(weights[m] > 0) || !std::isfinite(values[m]) || !std::isfinite(weights[m]))
        throw std::invalid_argument("item " + std::to_string(m) + " needs positive finite value and weight");
  }

  double total_weight() const {
    double w = 0;
    for (double x : weights) w += x;
    return w;
  }
  double total_value() const {
    double v = 0;
    for (double x : values) v += x;
    return v;
  }
};

/// Selection bits with cached totals. Caches are updated incrementally and
/// agree exactly with a fresh sum whenever values and weights are integers.
class State {
 public:
  explicit State(const Instance& inst) : inst_(&inst), bits_(inst.size(), 0) {}

  void flip(std::size_t m) {
    const double sign = bits_[m] ? -1.0 : 1.0;
    bits_[m] ^= 1u;
    value_ += sign * inst_->values[m];
    weight_ += sign * inst_->weights[m];
  }

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t m) const { return bits_[m]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  double value() const { return value_; }
  double weight() const { return weight_; }
  bool feasible() const { return weight_ <= inst_->capacity; }

  double recomputed_value() const { return dot(inst_->values); }
  double recomputed_weight() const { return dot(inst_->weights); }

 private:
  double dot(const std::vector<double>& x) const {
    double s = 0;
    for (std::size_t m = 0; m < bits_.size(); ++m)
      if (bits_[m]) s += x[m];
    return s;
  }

  const Instance* inst_;
  std::vector<std::uint8_t> bits_;
  double value_ = 0;
  double weight_ = 0;
};

/// Candidate obtained from a state by flipping items i and j, with its totals.
struct Move {
  std::size_t i = 0, j = 0;
  double value = 0;
  double weight = 0;
};

namespace detail {

inline Move make_move(const Instance& inst, const std::vector<std::uint8_t>& bits, double value, double weight,
                      std::size_t i, std::size_t j) {
  const double si = bits[i] ? -1.0 : 1.0;
  const double sj = bits[j] ? -1.0 : 1.0;
  return {i, j, value + si * inst.values[i] + sj * inst.values[j], weight + si * inst.weights[i] + sj * inst.weights[j]};
}

template <UniformSource Rng>
std::pair<std::size_t, std::size_t> draw_pair(std::size_t n, Rng& rng) {
  const std::size_t i = uniform_index(rng, n);
  std::size_t j = uniform_index(rng, n - 1);
  if (j >= i) ++j;
  return {i, j};
}

}  // namespace detail

/// Uniform unordered pair of distinct items, flipped together.
template <UniformSource Rng>
Move propose_two_item(const Instance& inst, const State& state, Rng& rng) {
  if (inst.size() < 2) throw std::invalid_argument("two-item proposals need at least two items");
  auto [i, j] = detail::draw_pair(inst.size(), rng);
  return detail::make_move(inst, state.bits(), state.value(), state.weight(), i, j);
}

inline bool feasible(const Instance& inst, const Move& move) { return move.weight <= inst.capacity; }

inline void apply(State& state, const Move& move) {
  state.flip(move.i);
  state.flip(move.j);
}

/// Accepts a feasible candidate iff u < min(1, exp(beta * (V' - V))).
inline bool metropolis_step(const Instance& inst, State& state, const Move& candidate, double beta, double u) {
  if (!feasible(inst, candidate)) return false;
  const double ratio = std::exp(beta * (candidate.value - state.value()));
  if (!(u < std::min(1.0, ratio))) return false;
  apply(state, candidate);
  return true;
}

/// Multiple-try Metropolis with k two-item candidates per step.
///
/// Candidate weights are exp(beta * V') (zero when infeasible). One candidate
/// y is selected in proportion to its weight, k - 1 reference moves are drawn
/// from y, and y is accepted with probability
/// min(1, sum w(candidates) / sum w(references + current)).
template <UniformSource Rng>
bool multiple_try_step(const Instance& inst, State& state, std::size_t k, double beta, Rng& rng) {
  if (k < 1) throw std::invalid_argument("multiple-try step needs k >= 1");
  if (inst.size() < 2) throw std::invalid_argument("two-item proposals need at least two items");
  const std::size_t n = inst.size();

  std::vector<Move> cands(k);
  double cmax = -std::numeric_limits<double>::infinity();
  for (auto& c : cands) {
    c = propose_two_item(inst, state, rng);
    if (feasible(inst, c)) cmax = std::max(cmax, c.value);
  }
  if (cmax == -std::numeric_limits<double>::infinity()) return false;

  std::vector<double> w(k, 0.0);
  double wsum = 0;
  for (std::size_t t = 0; t < k; ++t) {
    if (feasible(inst, cands[t])) w[t] = std::exp(beta * (cands[t].value - cmax));
    wsum += w[t];
  }
  const double pick = rng.uniform01() * wsum;
  std::size_t sel = 0;
  for (double acc = w[0]; sel + 1 < k && !(pick < acc); acc += w[++sel]) {
  }
  while (w[sel] == 0.0) --sel;  // pick landed past the last nonzero weight through rounding
  const Move& y = cands[sel];

  std::vector<std::uint8_t> ybits = state.bits();
  ybits[y.i] ^= 1u;
  ybits[y.j] ^= 1u;
  double vmax = std::max(cmax, state.value());
  std::vector<Move> refs(k - 1);
  for (auto& r : refs) {
    auto [i, j] = detail::draw_pair(n, rng);
    r = detail::make_move(inst, ybits, y.value, y.weight, i, j);
    if (feasible(inst, r)) vmax = std::max(vmax, r.value);
  }

  double num = 0, den = std::exp(beta * (state.value() - vmax));
  for (const Move& c : cands)
    if (feasible(inst, c)) num += std::exp(beta * (c.value - vmax));
  for (const Move& r : refs)
    if (feasible(inst, r)) den += std::exp(beta * (r.value - vmax));

  const double u = rng.uniform01();
  if (!(u * den < num)) return false;
  apply(state, y);
  return true;
}

struct SolveResult {
  std::vector<std::uint8_t> best;
  double best_value = 0;
  std::vector<double> trace;  ///< best-so-far value every trace_stride steps
  std::size_t accepted = 0;
};

/// Anytime MCMC search from the empty selection. k = 1 runs plain Metropolis,
/// k > 1 multiple-try Metropolis; beta follows `schedule` over `steps`.
template <UniformSource Rng>
SolveResult solve(const Instance& inst, const Schedule& schedule, std::size_t steps, std::size_t k, Rng& rng,
                  std::size_t trace_stride = 1) {
  inst.validate();
  if (trace_stride < 1) throw std::invalid_argument("trace stride must be >= 1");
  SolveResult result;
  State state(inst);
  result.best = state.bits();
  result.best_value = 0;
  if (inst.size() < 2) return result;
  result.trace.reserve(steps / trace_stride + 1);
  for (std::size_t t = 0; t < steps; ++t) {
    const double beta = schedule.at(t, steps);
    bool accepted;
    if (k == 1) {
      const Move m = propose_two_item(inst, state, rng);
      accepted = metropolis_step(inst, state, m, beta, rng.uniform01());
    } else {
      accepted = multiple_try_step(inst, state, k, beta, rng);
    }
    if (accepted) {
      ++result.accepted;
      if (state.value() > result.best_value) {
        result.best_value = state.value();
        result.best = state.bits();
      }
    }
    if ((t + 1) % trace_stride == 0) result.trace.push_back(result.best_value);
  }
  return result;
}

/// Default inverse-temperature ramp for solve().
inline Schedule default_beta_schedule() { return Schedule::geometric(0.001, 10.0); }

// ---------------------------------------------------------------------------
// Exact baseline

inline constexpr double kDpCellLimit = 1e8;

struct DpResult {
  double value = 0;
  std::vector<std::uint8_t> selection;
};

/// O(N * C) table over integer capacities; non-integral capacities are
/// floored, which is exact for integer weights.
inline DpResult dp_solve(const Instance& inst) {
  inst.validate();
  for (double w : inst.weights)
    if (w != std::floor(w)) throw std::invalid_argument("dynamic programming needs integer weights");
  const double cap_floor = std::floor(inst.capacity);
  const std::size_t n = inst.size();
  if (cap_floor * static_cast<double>(std::max<std::size_t>(n, 1)) > kDpCellLimit)
    throw std::length_error("dynamic programming table exceeds 1e8 cells");
  const auto cap = static_cast<std::size_t>(cap_floor);

  std::vector<double> best(cap + 1, 0.0);
  std::vector<bool> take(n * (cap + 1), false);
  for (std::size_t m = 0; m < n; ++m) {
    const auto w = static_cast<std::size_t>(inst.weights[m]);
    if (w > cap) continue;
    for (std::size_t c = cap; c >= w; --c) {
      const double with = best[c - w] + inst.values[m];
      if (with > best[c]) {
        best[c] = with;
        take[m * (cap + 1) + c] = true;
      }
      if (c == w) break;
    }
  }
  DpResult r{best[cap], std::vector<std::uint8_t>(n, 0)};
  std::size_t c = cap;
  for (std::size_t m = n; m-- > 0;)
    if (take[m * (cap + 1) + c]) {
      r.selection[m] = 1;
      c -= static_cast<std::size_t>(inst.weights[m]);
    }
  return r;
}

// ---------------------------------------------------------------------------
// Instance file: "capacity=C" line, optional "value,weight" header, then one
// "value,weight" row per item. '#' starts a comment.

inline Instance parse_instance(std::istream& in) {
  Instance inst;
  bool have_capacity = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line == "value,weight") continue;
    if (line.rfind("capacity=", 0) == 0) {
      inst.capacity = std::stod(line.substr(9));
      have_capacity = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("instance line " + std::to_string(lineno) + ": expected value,weight");
    try {
      inst.values.push_back(std::stod(line.substr(0, comma)));
      inst.weights.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw std::runtime_error("instance line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!have_capacity) throw std::runtime_error("instance file has no capacity= line");
  inst.validate();
  return inst;
}

inline void write_instance(std::ostream& out, const Instance& inst) {
  const auto old = out.precision(17);
  out << "capacity=" << inst.capacity << "\nvalue,weight\n";
  for (std::size_t m = 0; m < inst.size(); ++m) out << inst.values[m] << ',' << inst.weights[m] << '\n';
  out.precision(old);
}

/// Random instance with integer values and weights uniform in [1, max_item]
/// and capacity floor(fraction * total weight).
template <UniformSource Rng>
Instance random_instance(std::size_t n, Rng& rng, double fraction = 0.5, std::size_t max_item = 1000) {
  Instance inst;
  for (std::size_t m = 0; m < n; ++m) {
    inst.values.push_back(static_cast<double>(1 + uniform_index(rng, max_item)));
    inst.weights.push_back(static_cast<double>(1 + uniform_index(rng, max_item)));
  }
  inst.capacity = std::floor(fraction * inst.total_weight());
  return inst;
}

}  // namespace pcomp::knapsack
