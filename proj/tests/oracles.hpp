// Reference implementations used only by the tests. Each one recomputes a
// quantity from first principles, sharing no code with the library routine
// it checks.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "pcomp/bayes.hpp"
#include "pcomp/ising.hpp"
#include "pcomp/knapsack.hpp"
#include "pcomp/qmc.hpp"
#include "pcomp/tfim.hpp"

namespace oracle {

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0;
  for (std::size_t a = 0; a < p.size(); ++a) d += std::abs(p[a] - q[a]);
  return d / 2;
}

inline std::vector<double> normalize_counts(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  std::vector<double> p(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) p[a] = static_cast<double>(counts[a]) / total;
  return p;
}

// ---------------------------------------------------------------------------
// Bayesian networks: full joint by enumeration, P(x) = prod_v P(x_v | parents).

inline std::vector<double> bayes_joint(const pcomp::bayes::BayesNet& net) {
  const std::size_t n = net.size();
  std::vector<double> joint(std::size_t{1} << n);
  for (std::size_t a = 0; a < joint.size(); ++a) {
    double p = 1;
    for (std::size_t v = 0; v < n; ++v) {
      const auto& node = net.node(v);
      std::size_t row = 0;
      for (std::size_t j = 0; j < node.parents.size(); ++j) row += ((a >> node.parents[j]) & 1u) << j;
      const double p1 = node.cpt[row];
      p *= ((a >> v) & 1u) ? p1 : 1 - p1;
    }
    joint[a] = p;
  }
  return joint;
}

inline double bayes_marginal(const std::vector<double>& joint, std::size_t v) {
  double m = 0;
  for (std::size_t a = 0; a < joint.size(); ++a)
    if ((a >> v) & 1u) m += joint[a];
  return m;
}

/// Pearson correlation of the +-1 images of nodes a and b under the joint.
inline double bayes_correlation(const std::vector<double>& joint, std::size_t a, std::size_t b) {
  double ex = 0, ey = 0, exy = 0;
  for (std::size_t s = 0; s < joint.size(); ++s) {
    const double x = ((s >> a) & 1u) ? 1.0 : -1.0;
    const double y = ((s >> b) & 1u) ? 1.0 : -1.0;
    ex += joint[s] * x;
    ey += joint[s] * y;
    exy += joint[s] * x * y;
  }
  return (exy - ex * ey) / std::sqrt((1 - ex * ex) * (1 - ey * ey));
}

// ---------------------------------------------------------------------------
// Knapsack

inline double knapsack_brute_force(const pcomp::knapsack::Instance& inst) {
  const std::size_t n = inst.size();
  double best = 0;
  for (std::size_t a = 0; a < (std::size_t{1} << n); ++a) {
    double v = 0, w = 0;
    for (std::size_t m = 0; m < n; ++m)
      if ((a >> m) & 1u) {
        v += inst.values[m];
        w += inst.weights[m];
      }
    if (w <= inst.capacity && v > best) best = v;
  }
  return best;
}

/// exp(beta V) over feasible subsets with the same item-count parity as the
/// empty selection, normalized. Index bit m = item m taken.
inline std::vector<double> knapsack_stationary(const pcomp::knapsack::Instance& inst, double beta) {
  const std::size_t n = inst.size();
  std::vector<double> p(std::size_t{1} << n, 0.0);
  double z = 0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    double v = 0, w = 0;
    int count = 0;
    for (std::size_t m = 0; m < n; ++m)
      if ((a >> m) & 1u) {
        v += inst.values[m];
        w += inst.weights[m];
        ++count;
      }
    if (w <= inst.capacity && count % 2 == 0) p[a] = std::exp(beta * v);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

// ---------------------------------------------------------------------------
// Ising

/// E = -(1/2) sum_{i != j} W_ij s_i s_j - sum_i h_i s_i from the dense matrix.
inline double ising_energy(const pcomp::ising::IsingModel& m, const pcomp::ising::Spins& s) {
  double pair = 0, lin = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j) pair += m.coupling(i, j) * s[i] * s[j];
    lin += m.bias(i) * s[i];
  }
  return -0.5 * pair - lin;
}

inline std::vector<double> boltzmann(const pcomp::ising::IsingModel& m) {
  const std::size_t n = m.size();
  const int lo = pcomp::ising::low_spin(m.convention());
  std::vector<double> p(std::size_t{1} << n);
  double z = 0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    pcomp::ising::Spins s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<std::int8_t>(((a >> i) & 1u) ? 1 : lo);
    p[a] = std::exp(-m.beta() * ising_energy(m, s));
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

// ---------------------------------------------------------------------------
// Circuits: explicit sum over all 2^(n (d-1)) intermediate basis sequences.

inline std::complex<double> path_sum(const pcomp::qmc::GateCircuit& c, std::size_t m) {
  const std::size_t n = c.qubits(), d = c.depth();
  if (d == 0) return c.initial() == m ? 1.0 : 0.0;
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t inner = d - 1;
  std::size_t paths = 1;
  for (std::size_t l = 0; l < inner; ++l) paths *= dim;
  std::complex<double> total = 0;
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t rest = code, prev = c.initial();
    std::complex<double> amp = 1;
    for (std::size_t l = 0; l < d; ++l) {
      std::size_t next;
      if (l + 1 < d) {
        next = rest % dim;
        rest /= dim;
      } else {
        next = m;
      }
      const auto& g = c.gates()[l];
      bool spectators_match = true;
      std::size_t sub_out = 0, sub_in = 0;
      for (std::size_t q = 0; q < n; ++q) {
        bool target = false;
        for (std::size_t t = 0; t < g.targets.size(); ++t)
          if (g.targets[t] == q) {
            target = true;
            sub_out |= ((next >> q) & 1u) << t;
            sub_in |= ((prev >> q) & 1u) << t;
          }
        if (!target && (((next >> q) & 1u) != ((prev >> q) & 1u))) spectators_match = false;
      }
      if (!spectators_match) {
        amp = 0;
        break;
      }
      amp *= g.matrix[sub_out * g.dim() + sub_in];
      prev = next;
    }
    total += amp;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Transverse-field Ising

/// Nearest-neighbour correlation on a periodic ring of r +-1 spins with
/// coupling K (weight exp(K sum s_k s_(k+1))), from the 2x2 transfer matrix.
inline double ring_neighbor_correlation(double k, std::size_t r) {
  const double t = std::tanh(k);
  const double tr = std::pow(t, static_cast<double>(r));
  return (t + std::pow(t, static_cast<double>(r) - 1)) / (1 + tr);
}

/// Thermal <sz_i sz_j> from exp(-beta H) by scaling and squaring a Taylor
/// series, with H assembled from Kronecker products of Pauli matrices.
inline std::vector<double> tfim_zz_series(const pcomp::tfim::TfimProblem& p) {
  using Mat = Eigen::MatrixXd;
  const std::size_t n = p.n;
  Mat sx(2, 2), sz(2, 2), id = Mat::Identity(2, 2);
  sx << 0, 1, 1, 0;
  sz << -1, 0, 0, 1;  // bit 0 -> -1, bit 1 -> +1
  // Qubit i sits at bit i of the basis index; the last factor of a Kronecker
  // product is the lowest bit, so iterate from the highest qubit down.
  auto op = [&](std::map<std::size_t, Mat> factors) {
    Mat out = Mat::Identity(1, 1);
    for (std::size_t q = n; q-- > 0;) {
      const Mat& f = factors.count(q) ? factors[q] : id;
      Mat next(out.rows() * 2, out.cols() * 2);
      for (Eigen::Index a = 0; a < out.rows(); ++a)
        for (Eigen::Index b = 0; b < out.cols(); ++b) next.block(a * 2, b * 2, 2, 2) = out(a, b) * f;
      out = next;
    }
    return out;
  };
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Mat h = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j)
      if (p.coupling(i, j) != 0) h -= p.coupling(i, j) * op({{i, sz}, {j, sz}});
    if (p.bias[i] != 0) h -= p.bias[i] * op({{i, sz}});
    h -= p.gamma * op({{i, sx}});
  }
  int squarings = 0;
  Mat a = -p.beta * h;
  while (a.cwiseAbs().rowwise().sum().maxCoeff() > 0.5) {
    a /= 2;
    ++squarings;
  }
  Mat term = Mat::Identity(dim, dim), rho = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / k;
    rho += term;
  }
  for (int s = 0; s < squarings; ++s) rho = rho * rho;
  rho /= rho.trace();
  std::vector<double> zz(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) zz[i * n + j] = (rho * op({{i, sz}}) * op({{j, sz}})).trace();
  return zz;
}

}  // namespace oracle
