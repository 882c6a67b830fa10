// Feynman-path sampling of gate-circuit amplitudes.
//
// psi_m = sum over basis paths x_0 -> x_1 -> ... -> x_d = m of
//         U^(d)[m, x_(d-1)] ... U^(1)[x_1, x_0],  x_0 = initial state.
//
// The sampler walks the first d-1 layers choosing among the nonzero matrix
// elements leaving the current basis state, closes the path on m at the last
// layer, and averages amplitude / proposal probability. Cancellation between
// path contributions shows up as an average sign well below one.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcomp/rng.hpp"

namespace pcomp::qmc {

using cplx = std::complex<double>;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kZeroAmplitude = 1e-14;
inline constexpr std::size_t kMaxStateVectorQubits = 20;

/// Unitary on up to two qubits. Local basis index: bit t is the value of
/// qubit targets[t]; matrix is row-major, element (out, in).
struct Gate {
  std::string name;
  std::vector<std::size_t> targets;
  std::vector<cplx> matrix;

  std::size_t dim() const { return std::size_t{1} << targets.size(); }
  cplx element(std::size_t out, std::size_t in) const { return matrix[out * dim() + in]; }

  std::size_t local_index(std::size_t basis) const {
    std::size_t sub = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) sub |= ((basis >> targets[t]) & 1u) << t;
    return sub;
  }

  std::size_t with_local(std::size_t basis, std::size_t sub) const {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::size_t bit = std::size_t{1} << targets[t];
      basis = ((sub >> t) & 1u) ? (basis | bit) : (basis & ~bit);
    }
    return basis;
  }

  /// <out| U |in> on the full register (zero when non-target bits differ).
  cplx amplitude(std::size_t out, std::size_t in) const {
    std::size_t mask = 0;
    for (auto q : targets) mask |= std::size_t{1} << q;
    if ((out & ~mask) != (in & ~mask)) return 0.0;
    return element(local_index(out), local_index(in));
  }

  bool is_unitary(double tol = kUnitaryTolerance) const {
    const std::size_t d = dim();
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        cplx s = 0;
        for (std::size_t k = 0; k < d; ++k) s += std::conj(element(k, a)) * element(k, b);
        if (std::abs(s - (a == b ? 1.0 : 0.0)) > tol) return false;
      }
    return true;
  }
};

namespace gates {

inline Gate custom(std::string name, std::vector<std::size_t> targets, std::vector<cplx> matrix) {
  if (targets.empty() || targets.size() > 2) throw std::invalid_argument("gates act on one or two qubits");
  if (targets.size() == 2 && targets[0] == targets[1]) throw std::invalid_argument("gate targets must be distinct");
  Gate g{std::move(name), std::move(targets), std::move(matrix)};
  if (g.matrix.size() != g.dim() * g.dim())
    throw std::invalid_argument("gate " + g.name + " matrix has " + std::to_string(g.matrix.size()) + " entries, expected " +
                                std::to_string(g.dim() * g.dim()));
  if (!g.is_unitary()) throw std::invalid_argument("gate " + g.name + " is not unitary");
  return g;
}

inline Gate h(std::size_t q) {
  const double r = 1.0 / std::numbers::sqrt2;
  return custom("H", {q}, {r, r, r, -r});
}
inline Gate x(std::size_t q) { return custom("X", {q}, {0, 1, 1, 0}); }
inline Gate z(std::size_t q) { return custom("Z", {q}, {1, 0, 0, -1}); }
inline Gate rz(std::size_t q, double theta) {
  return custom("RZ", {q}, {std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2)});
}
/// Flips `target` when `control` is 1; local bit 0 is the control.
inline Gate cnot(std::size_t control, std::size_t target) {
  return custom("CNOT", {control, target},
                {1, 0, 0, 0,  //
                 0, 0, 0, 1,  //
                 0, 0, 1, 0,  //
                 0, 1, 0, 0});
}
/// General single-qubit unitary e^{i a} RZ(b) RY(c) RZ(d).
inline Gate u3(std::size_t q, double a, double b, double c, double d) {
  const cplx ph = std::polar(1.0, a);
  const double cs = std::cos(c / 2), sn = std::sin(c / 2);
  const cplx e00 = ph * std::polar(cs, -(b + d) / 2);
  const cplx e01 = ph * -std::polar(sn, -(b - d) / 2);
  const cplx e10 = ph * std::polar(sn, (b - d) / 2);
  const cplx e11 = ph * std::polar(cs, (b + d) / 2);
  return custom("U", {q}, {e00, e01, e10, e11});
}

}  // namespace gates

class GateCircuit {
 public:
  explicit GateCircuit(std::size_t qubits, std::size_t initial = 0) : n_(qubits), initial_(initial) {
    if (qubits == 0 || qubits > 63) throw std::invalid_argument("circuit needs 1..63 qubits");
    if (initial >> qubits) throw std::invalid_argument("initial basis state out of range");
  }

  GateCircuit& add(Gate g) {
    for (auto q : g.targets)
      if (q >= n_) throw std::out_of_range("gate " + g.name + " targets qubit " + std::to_string(q));
    if (!g.is_unitary()) throw std::invalid_argument("gate " + g.name + " is not unitary");
    gates_.push_back(std::move(g));
    return *this;
  }

  std::size_t qubits() const { return n_; }
  std::size_t initial() const { return initial_; }
  std::size_t depth() const { return gates_.size(); }
  const std::vector<Gate>& gates() const { return gates_; }

 private:
  std::size_t n_;
  std::size_t initial_;
  std::vector<Gate> gates_;
};

/// Dense state-vector propagation of the initial basis state.
inline std::vector<cplx> state_vector(const GateCircuit& c) {
  if (c.qubits() > kMaxStateVectorQubits) throw std::length_error("state vector refuses more than 20 qubits");
  const std::size_t dim = std::size_t{1} << c.qubits();
  std::vector<cplx> psi(dim, 0.0), next(dim);
  psi[c.initial()] = 1.0;
  for (const Gate& g : c.gates()) {
    std::fill(next.begin(), next.end(), cplx{0.0});
    for (std::size_t x = 0; x < dim; ++x) {
      if (psi[x] == cplx{0.0}) continue;
      const std::size_t in = g.local_index(x);
      for (std::size_t out = 0; out < g.dim(); ++out) next[g.with_local(x, out)] += g.element(out, in) * psi[x];
    }
    std::swap(psi, next);
  }
  return psi;
}

/// Exact <m| U^(d) ... U^(1) |initial>.
inline cplx brute_force_amplitude(const GateCircuit& c, std::size_t m) {
  if (m >> c.qubits()) throw std::out_of_range("target basis state out of range");
  return state_vector(c).at(m);
}

enum class PathProposal {
  Uniform,    ///< uniform over nonzero transitions at each layer
  Magnitude,  ///< proportional to |U[y, x]| at each layer
};

struct PathEstimate {
  cplx amplitude{0.0};
  double std_error = 0;
  double average_sign = 0;  ///< |sum z| / sum |z| over path contributions z
  std::size_t samples = 0;
};

template <UniformSource Rng>
PathEstimate feynman_path_sample(const GateCircuit& c, std::size_t m, std::size_t samples, Rng& rng,
                                 PathProposal proposal = PathProposal::Uniform) {
  if (samples < 2) throw std::invalid_argument("need at least two path samples");
  if (m >> c.qubits()) throw std::out_of_range("target basis state out of range");
  const auto& layers = c.gates();
  const std::size_t d = layers.size();

  cplx sum = 0;
  double sum_abs = 0, sum_sq = 0;
  std::vector<std::pair<std::size_t, cplx>> moves;
  std::vector<double> w;
  for (std::size_t k = 0; k < samples; ++k) {
    std::size_t x = c.initial();
    cplx amp = 1.0;
    double q = 1.0;
    for (std::size_t l = 0; l + 1 < d; ++l) {
      const Gate& g = layers[l];
      const std::size_t in = g.local_index(x);
      moves.clear();
      for (std::size_t out = 0; out < g.dim(); ++out) {
        const cplx e = g.element(out, in);
        if (std::abs(e) > kZeroAmplitude) moves.emplace_back(g.with_local(x, out), e);
      }
      std::size_t pick;
      double p;
      if (proposal == PathProposal::Uniform) {
        pick = uniform_index(rng, moves.size());
        p = 1.0 / static_cast<double>(moves.size());
      } else {
        w.resize(moves.size());
        double tot = 0;
        for (std::size_t t = 0; t < moves.size(); ++t) tot += (w[t] = std::abs(moves[t].second));
        const double r = rng.uniform01() * tot;
        double acc = 0;
        for (pick = 0; pick + 1 < moves.size() && !(r < (acc += w[pick])); ++pick) {
        }
        p = w[pick] / tot;
      }
      x = moves[pick].first;
      amp *= moves[pick].second;
      q *= p;
    }
    const cplx z = d == 0 ? cplx(x == m ? 1.0 : 0.0) : amp * layers[d - 1].amplitude(m, x) / q;
    sum += z;
    sum_abs += std::abs(z);
    sum_sq += std::norm(z);
  }
  const double n = static_cast<double>(samples);
  PathEstimate est;
  est.samples = samples;
  est.amplitude = sum / n;
  const double var = std::max(0.0, (sum_sq - n * std::norm(est.amplitude)) / (n - 1));
  est.std_error = std::sqrt(var / n);
  est.average_sign = sum_abs > 0 ? std::min(1.0, std::abs(sum) / sum_abs) : 0.0;
  return est;
}

/// Random circuit drawn from {H, X, Z, RZ, U3, CNOT} with uniformly chosen
/// targets; CNOT only when there are at least two qubits.
template <UniformSource Rng>
GateCircuit random_circuit(std::size_t qubits, std::size_t depth, Rng& rng) {
  GateCircuit c(qubits);
  const double two_pi = 2 * std::numbers::pi;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t kinds = qubits >= 2 ? 6 : 5;
    const std::size_t kind = uniform_index(rng, kinds);
    const std::size_t q = uniform_index(rng, qubits);
    switch (kind) {
      case 0: c.add(gates::h(q)); break;
      case 1: c.add(gates::x(q)); break;
      case 2: c.add(gates::z(q)); break;
      case 3: c.add(gates::rz(q, two_pi * rng.uniform01())); break;
      case 4: {
        const double a = two_pi * rng.uniform01(), b = two_pi * rng.uniform01();
        const double cc = std::numbers::pi * rng.uniform01(), dd = two_pi * rng.uniform01();
        c.add(gates::u3(q, a, b, cc, dd));
        break;
      }
      default: {
        std::size_t t = uniform_index(rng, qubits - 1);
        if (t >= q) ++t;
        c.add(gates::cnot(q, t));
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Circuit file
//
//   qubits <n>
//   init <basis index>                       (optional, default 0)
//   GATE H|X|Z <q>
//   GATE RZ(<theta>) <q>
//   GATE CNOT <control> <target>
//   GATE U <q> [<q2>] | re im re im ...      (row-major custom unitary)
//
// '#' starts a comment.

inline GateCircuit parse_circuit(std::istream& in) {
  std::size_t qubits = 0, init = 0;
  std::vector<Gate> gates;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("circuit file line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string matrix_part;
    if (auto bar = line.find('|'); bar != std::string::npos) {
      matrix_part = line.substr(bar + 1);
      line.erase(bar);
    }
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "qubits") {
      if (!(ls >> qubits)) fail("bad qubit count");
      continue;
    }
    if (key == "init") {
      if (!(ls >> init)) fail("bad initial state");
      continue;
    }
    if (key != "GATE") fail("unknown directive " + key);
    std::string name;
    if (!(ls >> name)) fail("GATE needs a name");
    std::vector<std::size_t> targets;
    std::size_t q;
    while (ls >> q) targets.push_back(q);
    if (!ls.eof()) fail("malformed target list");
    auto need = [&](std::size_t k) {
      if (targets.size() != k) fail(name + " takes " + std::to_string(k) + " target(s)");
    };
    try {
      if (name == "H") {
        need(1);
        gates.push_back(gates::h(targets[0]));
      } else if (name == "X") {
        need(1);
        gates.push_back(gates::x(targets[0]));
      } else if (name == "Z") {
        need(1);
        gates.push_back(gates::z(targets[0]));
      } else if (name == "CNOT") {
        need(2);
        gates.push_back(gates::cnot(targets[0], targets[1]));
      } else if (name.rfind("RZ(", 0) == 0 && name.back() == ')') {
        need(1);
        gates.push_back(gates::rz(targets[0], std::stod(name.substr(3, name.size() - 4))));
      } else if (name == "U") {
        std::istringstream ms(matrix_part);
        std::vector<cplx> entries;
        double re, im;
        while (ms >> re >> im) entries.emplace_back(re, im);
        gates.push_back(gates::custom("U", targets, std::move(entries)));
      } else {
        fail("unknown gate " + name);
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (qubits == 0) throw std::runtime_error("circuit file has no 'qubits' line");
  GateCircuit c(qubits, init);
  for (auto& g : gates) c.add(std::move(g));
  return c;
}

}  // namespace pcomp::qmc
