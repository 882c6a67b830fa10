// p-bits: binary stochastic units whose output mean is sigmoid(input).

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcomp/rng.hpp"

namespace pcomp {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Inverse of sigmoid on (0,1).
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// s = step(sigmoid(I) - u): 1 with probability sigmoid(I) when u ~ U[0,1).
inline unsigned pbit_sample(double input, double u) {
  if (!std::isfinite(input)) throw std::domain_error("p-bit input is not finite");
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("uniform variate outside [0,1)");
  return sigmoid(input) > u ? 1u : 0u;
}

/// N p-bits: the inputs that drove the last draw and the outputs it produced.
class PBitVector {
 public:
  explicit PBitVector(std::size_t n) : inputs_(n, 0.0), outputs_(n, 0) {
    if (n == 0) throw std::invalid_argument("p-bit vector must have at least one bit");
  }

  std::size_t size() const { return outputs_.size(); }
  std::span<const double> inputs() const { return inputs_; }
  std::span<const std::uint8_t> outputs() const { return outputs_; }
  std::uint8_t operator[](std::size_t i) const { return outputs_[i]; }

  /// Draw every bit from `inputs`, one fresh uniform per bit in index order.
  template <UniformSource Rng>
  void sample(std::span<const double> inputs, Rng& rng) {
    if (inputs.size() != outputs_.size())
      throw std::invalid_argument("p-bit input length " + std::to_string(inputs.size()) +
                                  " does not match vector length " + std::to_string(size()));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      inputs_[i] = inputs[i];
      outputs_[i] = static_cast<std::uint8_t>(pbit_sample(inputs[i], rng.uniform01()));
    }
  }

 private:
  std::vector<double> inputs_;
  std::vector<std::uint8_t> outputs_;
};

template <UniformSource Rng>
PBitVector pbit_array_sample(std::span<const double> inputs, Rng& rng) {
  PBitVector v(inputs.size());
  v.sample(inputs, rng);
  return v;
}

}  // namespace pcomp
