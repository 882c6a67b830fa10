// Transverse-field Ising model on p-bits via the Suzuki-Trotter replica map,
// with an exact-diagonalization oracle for small systems.
//
//   H = -sum_{i<j} J_ij sz_i sz_j - sum_i g_i sz_i - Gamma sum_i sx_i
//
// r imaginary-time replicas (periodic in k) turn Z = tr exp(-beta H) into a
// classical bipolar Ising model on n*r spins with dimensionless couplings
//   (beta/r) J_ij within a replica,  (beta/r) g_i as bias,
//   J_perp = (1/2) ln coth(beta Gamma / r) between neighbouring replicas.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcomp/ising.hpp"
#include "pcomp/rng.hpp"
#include "pcomp/schedule.hpp"

namespace pcomp::tfim {

using ising::Spins;

struct TfimProblem {
  std::size_t n = 0;
  std::vector<double> couplings;  ///< dense n x n, symmetric, zero diagonal
  std::vector<double> bias;       ///< longitudinal field g
  double gamma = 0;               ///< transverse field
  double beta = 1;
  std::size_t replicas = 2;

  TfimProblem() = default;
  TfimProblem(std::size_t spins, double gamma_, double beta_, std::size_t r)
      : n(spins), couplings(spins * spins, 0.0), bias(spins, 0.0), gamma(gamma_), beta(beta_), replicas(r) {}

  double coupling(std::size_t i, std::size_t j) const { return couplings.at(i * n + j); }
  void set_coupling(std::size_t i, std::size_t j, double v) {
    if (i == j) throw std::invalid_argument("TFIM coupling J_ii is not allowed");
    couplings.at(i * n + j) = v;
    couplings.at(j * n + i) = v;
  }

  void validate() const {
    if (n == 0) throw std::invalid_argument("TFIM needs at least one spin");
    if (couplings.size() != n * n || bias.size() != n) throw std::invalid_argument("TFIM dimensions inconsistent");
    for (std::size_t i = 0; i < n; ++i) {
      if (coupling(i, i) != 0) throw std::invalid_argument("TFIM coupling diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j)
        if (coupling(i, j) != coupling(j, i)) throw std::invalid_argument("TFIM couplings must be symmetric");
    }
    if (replicas < 2) throw std::invalid_argument("Trotter mapping needs at least two replicas");
    if (!std::isfinite(beta) || !(beta > 0)) throw std::invalid_argument("beta must be finite and positive");
    if (!std::isfinite(gamma) || gamma < 0) throw std::invalid_argument("transverse field must be finite and >= 0");
  }

  /// Nearest-neighbour open chain with uniform coupling.
  static TfimProblem chain(std::size_t spins, double j, double gamma, double beta, std::size_t r) {
    TfimProblem p(spins, gamma, beta, r);
    for (std::size_t i = 0; i + 1 < spins; ++i) p.set_coupling(i, i + 1, j);
    return p;
  }
};

/// Classical energy of one replica, -sum_{i<j} J s s - sum g s.
inline double classical_energy(const TfimProblem& p, const Spins& s) {
  double e = 0;
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = i + 1; j < p.n; ++j) e -= p.coupling(i, j) * s[i] * s[j];
    e -= p.bias[i] * s[i];
  }
  return e;
}

/// The equivalent classical bipolar model with the given dimensionless field.
inline ising::IsingModel classical_model(const TfimProblem& p, double beta = 1.0) {
  ising::IsingModel m(p.n, ising::Convention::Bipolar, beta);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = i + 1; j < p.n; ++j)
      if (p.coupling(i, j) != 0) m.add_coupling(i, j, p.coupling(i, j));
    m.set_bias(i, p.bias[i]);
  }
  return m;
}

/// (1/2) ln coth(beta Gamma / r).
inline double replica_coupling(double beta, double gamma, std::size_t r) {
  if (!(gamma > 0)) throw std::domain_error("replica coupling diverges at zero transverse field");
  const double x = beta * gamma / static_cast<double>(r);
  return -0.5 * std::log(std::tanh(x));
}

inline std::size_t site_index(std::size_t n, std::size_t i, std::size_t k) { return k * n + i; }

/// Bipolar model on n*r spins at beta = 1 (beta is folded into the couplings).
inline ising::IsingModel suzuki_trotter_map(const TfimProblem& p) {
  p.validate();
  const std::size_t r = p.replicas;
  const double jperp = replica_coupling(p.beta, p.gamma, r);
  const double scale = p.beta / static_cast<double>(r);
  ising::IsingModel m(p.n * r, ising::Convention::Bipolar, 1.0);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < p.n; ++i) {
      for (std::size_t j = i + 1; j < p.n; ++j)
        if (p.coupling(i, j) != 0) m.add_coupling(site_index(p.n, i, k), site_index(p.n, j, k), scale * p.coupling(i, j));
      m.set_bias(site_index(p.n, i, k), scale * p.bias[i]);
      m.add_coupling(site_index(p.n, i, k), site_index(p.n, i, (k + 1) % r), jperp);
    }
  }
  return m;
}

/// Spin configurations of the n x r replica lattice, one per kept sample.
struct ReplicaSamples {
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<Spins> samples;

  int spin(std::size_t sample, std::size_t i, std::size_t k) const { return samples[sample][site_index(n, i, k)]; }
};

struct SampleSchedule {
  std::size_t burn_in = 1000;  ///< sweeps discarded before the first sample
  std::size_t thinning = 10;   ///< sweeps between kept samples
};

/// Gibbs sampling of the mapped model from the all-up state.
template <UniformSource Rng>
ReplicaSamples tfim_sample(const TfimProblem& p, std::size_t samples, Rng& rng, SampleSchedule sched = {}) {
  if (sched.thinning < 1) throw std::invalid_argument("thinning must be >= 1");
  const ising::IsingModel model = suzuki_trotter_map(p);
  ReplicaSamples out{p.n, p.replicas, {}};
  out.samples.reserve(samples);
  Spins s(model.size(), 1);
  for (std::size_t t = 0; t < sched.burn_in; ++t) ising::gibbs_sweep(model, s, rng);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t t = 0; t < sched.thinning; ++t) ising::gibbs_sweep(model, s, rng);
    out.samples.push_back(s);
  }
  return out;
}

/// Mean of s_(i,k) s_(i+L,k) over samples, sites i < n - L and replicas k.
inline double zz_correlation(const ReplicaSamples& rs, std::size_t distance) {
  if (distance >= rs.n) throw std::out_of_range("site separation must be below the number of spins");
  if (rs.samples.empty()) throw std::invalid_argument("no samples");
  double sum = 0;
  std::size_t count = 0;
  for (const Spins& s : rs.samples)
    for (std::size_t k = 0; k < rs.replicas; ++k)
      for (std::size_t i = 0; i + distance < rs.n; ++i) {
        sum += s[site_index(rs.n, i, k)] * s[site_index(rs.n, i + distance, k)];
        ++count;
      }
  return sum / static_cast<double>(count);
}

/// Mean of s_(i,k) s_(j,k) over samples and replicas.
inline double zz_pair(const ReplicaSamples& rs, std::size_t i, std::size_t j) {
  double sum = 0;
  for (const Spins& s : rs.samples)
    for (std::size_t k = 0; k < rs.replicas; ++k) sum += s[site_index(rs.n, i, k)] * s[site_index(rs.n, j, k)];
  return sum / static_cast<double>(rs.samples.size() * rs.replicas);
}

// ---------------------------------------------------------------------------
// Exact diagonalization

inline constexpr std::size_t kMaxExactSpins = 8;

struct ThermalAverages {
  std::size_t n = 0;
  std::vector<double> zz;  ///< <sz_i sz_j>, n x n
  std::vector<double> z;   ///< <sz_i>
  std::vector<double> x;   ///< <sx_i>

  double zz_at(std::size_t i, std::size_t j) const { return zz.at(i * n + j); }

  /// Open-chain average of <sz_i sz_(i+L)> over i < n - L.
  double zz_distance(std::size_t distance) const {
    double s = 0;
    std::size_t c = 0;
    for (std::size_t i = 0; i + distance < n; ++i, ++c) s += zz_at(i, i + distance);
    return s / static_cast<double>(c);
  }
};

/// Thermal expectations at beta from the dense 2^n x 2^n Hamiltonian.
/// Basis state a has sz_i = +1 when bit i of a is set.
inline ThermalAverages exact_tfim_oracle(const TfimProblem& p) {
  if (p.n == 0 || p.n > kMaxExactSpins) throw std::length_error("exact TFIM oracle handles 1..8 spins");
  if (p.couplings.size() != p.n * p.n || p.bias.size() != p.n) throw std::invalid_argument("TFIM dimensions inconsistent");
  const std::size_t n = p.n, dim = std::size_t{1} << n;
  auto sz = [](std::size_t a, std::size_t i) { return ((a >> i) & 1u) ? 1.0 : -1.0; };

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t a = 0; a < dim; ++a) {
    double diag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) diag -= p.coupling(i, j) * sz(a, i) * sz(a, j);
      diag -= p.bias[i] * sz(a, i);
      h(static_cast<Eigen::Index>(a ^ (std::size_t{1} << i)), static_cast<Eigen::Index>(a)) -= p.gamma;
    }
    h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = diag;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  const Eigen::VectorXd& e = eig.eigenvalues();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const double e0 = e.minCoeff();
  Eigen::VectorXd w = (-p.beta * (e.array() - e0)).exp();
  w /= w.sum();

  // Diagonal observables need only the thermal weight of each basis state.
  Eigen::VectorXd rho_diag = (v.array().square().matrix()) * w;
  ThermalAverages out{n, std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t a = 0; a < dim; ++a) {
    const double pa = rho_diag(static_cast<Eigen::Index>(a));
    for (std::size_t i = 0; i < n; ++i) {
      out.z[i] += pa * sz(a, i);
      for (std::size_t j = 0; j < n; ++j) out.zz[i * n + j] += pa * sz(a, i) * sz(a, j);
    }
  }
  // <sx_i> = sum_k w_k sum_a v_k(a) v_k(a ^ bit_i).
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(dim); ++k) {
      double ev = 0;
      for (std::size_t a = 0; a < dim; ++a)
        ev += v(static_cast<Eigen::Index>(a), k) * v(static_cast<Eigen::Index>(a ^ (std::size_t{1} << i)), k);
      acc += w(k) * ev;
    }
    out.x[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quantum annealing

struct QuantumAnnealResult {
  Spins state;  ///< majority vote over replicas, ties broken by replica 0
  double energy = 0;
};

/// Gibbs sweeps of the replica lattice while Gamma (and optionally beta)
/// follow their schedules; the final Gamma must stay positive.
template <UniformSource Rng>
QuantumAnnealResult quantum_anneal(const TfimProblem& p, const Schedule& gamma, const Schedule& beta,
                                   std::size_t sweeps, Rng& rng) {
  if (sweeps == 0) throw std::invalid_argument("quantum anneal needs at least one sweep");
  if (!(gamma.end() > 0) || !(gamma.start() > 0)) throw std::invalid_argument("transverse field must stay positive");
  TfimProblem q = p;
  q.validate();
  Spins s(p.n * p.replicas);
  for (auto& x : s) x = rng.uniform01() < 0.5 ? 1 : -1;
  for (std::size_t t = 0; t < sweeps; ++t) {
    q.gamma = gamma.at(t, sweeps);
    q.beta = beta.at(t, sweeps);
    ising::gibbs_sweep(suzuki_trotter_map(q), s, rng);
  }
  QuantumAnnealResult out{Spins(p.n), 0.0};
  for (std::size_t i = 0; i < p.n; ++i) {
    int vote = 0;
    for (std::size_t k = 0; k < p.replicas; ++k) vote += s[site_index(p.n, i, k)];
    out.state[i] = static_cast<std::int8_t>(vote > 0 ? 1 : vote < 0 ? -1 : s[site_index(p.n, i, 0)]);
  }
  out.energy = classical_energy(p, out.state);
  return out;
}

// ---------------------------------------------------------------------------
// Config file
//
//   n <spins>
//   gamma <value>          beta <value>          replicas <r>
//   edge i j J_ij          bias i g_i
//   gamma_schedule <start> <end>     (linear, for annealing)
//   beta_schedule <start> <end>      (linear, for annealing)
//
// '#' starts a comment.

struct TfimConfig {
  TfimProblem problem;
  std::optional<Schedule> gamma_schedule;
  std::optional<Schedule> beta_schedule;
};

inline TfimConfig parse_config(std::istream& in) {
  std::size_t n = 0, r = 2;
  double gamma = 0, beta = 1;
  struct Edge { std::size_t i, j; double v; };
  std::vector<Edge> edges;
  std::vector<std::pair<std::size_t, double>> biases;
  TfimConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("tfim config line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    bool ok = true;
    if (key == "n") ok = static_cast<bool>(ls >> n);
    else if (key == "gamma") ok = static_cast<bool>(ls >> gamma);
    else if (key == "beta") ok = static_cast<bool>(ls >> beta);
    else if (key == "replicas") ok = static_cast<bool>(ls >> r);
    else if (key == "edge") {
      Edge e{};
      ok = static_cast<bool>(ls >> e.i >> e.j >> e.v);
      edges.push_back(e);
    } else if (key == "bias") {
      std::size_t i;
      double g;
      ok = static_cast<bool>(ls >> i >> g);
      biases.emplace_back(i, g);
    } else if (key == "gamma_schedule" || key == "beta_schedule") {
      double a, b;
      ok = static_cast<bool>(ls >> a >> b);
      if (ok) (key == "gamma_schedule" ? cfg.gamma_schedule : cfg.beta_schedule) = Schedule::linear(a, b);
    } else {
      fail("unknown key " + key);
    }
    if (!ok) fail("malformed value for " + key);
  }
  if (n == 0) throw std::runtime_error("tfim config has no 'n' line");
  cfg.problem = TfimProblem(n, gamma, beta, r);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) throw std::runtime_error("tfim config edge index out of range");
    cfg.problem.set_coupling(e.i, e.j, e.v);
  }
  for (auto [i, g] : biases) {
    if (i >= n) throw std::runtime_error("tfim config bias index out of range");
    cfg.problem.bias[i] = g;
  }
  cfg.problem.validate();
  return cfg;
}

}  // namespace pcomp::tfim
