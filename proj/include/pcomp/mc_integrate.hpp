// Importance-sampling estimates of large sums  M = sum_a m_a ~ (1/Ns) sum m_a / q_a.
//
// Indices are 0-based: term a here is term a+1 in the usual 1-based notation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcomp/rng.hpp"

namespace pcomp::mc {

/// Proposal distribution over term indices.
///
/// A proposal maps one uniform variate to an index (inverse transform) and
/// reports the probability of any index.
class Proposal {
 public:
  using Draw = std::function<std::size_t(double u)>;
  using Probability = std::function<double(std::size_t)>;

  static Proposal uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform proposal over zero terms");
    const double q = 1.0 / static_cast<double>(n);
    return Proposal(
        n, [n](double u) { return std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1); },
        [q](std::size_t) { return q; });
  }

  /// Table-driven proposal q_a = w_a / sum w, drawn by inverse CDF.
  static Proposal categorical(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("categorical proposal needs weights");
    for (double w : weights)
      if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("categorical weights must be finite and >= 0");
    std::vector<double> cdf(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cdf.begin());
    const double total = cdf.back();
    if (!(total > 0)) throw std::invalid_argument("categorical weights sum to zero");
    const std::size_t n = weights.size();
    return Proposal(
        n,
        [cdf, total, n](double u) {
          const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * total);
          return std::min(static_cast<std::size_t>(it - cdf.begin()), n - 1);
        },
        [w = std::move(weights), total](std::size_t a) { return w.at(a) / total; });
  }

  /// User-supplied sampler; `draw` must produce index a with probability `probability(a)`.
  static Proposal custom(std::size_t n, Draw draw, Probability probability) {
    return Proposal(n, std::move(draw), std::move(probability));
  }

  std::size_t size() const { return n_; }
  std::size_t draw(double u) const { return draw_(u); }
  double probability(std::size_t a) const { return probability_(a); }

 private:
  Proposal(std::size_t n, Draw draw, Probability probability)
      : n_(n), draw_(std::move(draw)), probability_(std::move(probability)) {}

  std::size_t n_;
  Draw draw_;
  Probability probability_;
};

inline constexpr std::size_t kEnumerationLimit = std::size_t{1} << 20;
inline constexpr std::size_t kExactSumLimit = std::size_t{1} << 24;

class SumProblem {
 public:
  using Term = std::function<double(std::size_t)>;

  SumProblem(std::size_t n, Term term, Proposal proposal)
      : n_(n), term_(std::move(term)), proposal_(std::move(proposal)) {
    if (n_ == 0) throw std::invalid_argument("sum over zero terms");
    if (proposal_.size() != n_) throw std::invalid_argument("proposal size does not match term count");
    if (n_ <= kEnumerationLimit) validate_support();
  }

  static SumProblem from_terms(std::vector<double> terms) {
    const std::size_t n = terms.size();
    return {n, [t = std::move(terms)](std::size_t a) { return t.at(a); }, Proposal::uniform(n)};
  }

  static SumProblem from_terms(std::vector<double> terms, Proposal proposal) {
    const std::size_t n = terms.size();
    return {n, [t = std::move(terms)](std::size_t a) { return t.at(a); }, std::move(proposal)};
  }

  std::size_t size() const { return n_; }
  double term(std::size_t a) const { return term_(a); }
  const Proposal& proposal() const { return proposal_; }

 private:
  void validate_support() const {
    double total = 0;
    for (std::size_t a = 0; a < n_; ++a) {
      const double q = proposal_.probability(a);
      if (q < 0) throw std::invalid_argument("negative proposal probability at index " + std::to_string(a));
      if (q == 0 && term_(a) != 0)
        throw std::invalid_argument("proposal has no support at nonzero term " + std::to_string(a));
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("proposal probabilities sum to " + std::to_string(total));
  }

  std::size_t n_;
  Term term_;
  Proposal proposal_;
};

struct Estimate {
  double value = 0;
  double std_error = 0;
};

template <UniformSource Rng>
Estimate mc_estimate(const SumProblem& problem, std::size_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("need at least two samples for a standard error");
  double mean = 0, m2 = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t a = problem.proposal().draw(rng.uniform01());
    const double q = problem.proposal().probability(a);
    if (!(q > 0)) throw std::domain_error("sampled index " + std::to_string(a) + " has zero proposal probability");
    const double x = problem.term(a) / q;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  const double n = static_cast<double>(samples);
  return {mean, std::sqrt(m2 / (n - 1) / n)};
}

/// Brute-force sum; the oracle for mc_estimate.
inline double exact_sum(const SumProblem& problem) {
  if (problem.size() > kExactSumLimit)
    throw std::length_error("exact_sum refuses " + std::to_string(problem.size()) + " terms (limit 2^24)");
  long double total = 0;
  for (std::size_t a = 0; a < problem.size(); ++a) total += problem.term(a);
  return static_cast<double>(total);
}

}  // namespace pcomp::mc
