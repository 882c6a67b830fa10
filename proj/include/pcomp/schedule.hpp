// Parameter ramps (inverse temperature, transverse field) over a run.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace pcomp {

class Schedule {
 public:
  enum class Shape { Constant, Linear, Geometric };

  static Schedule constant(double value) { return {Shape::Constant, value, value}; }
  static Schedule linear(double start, double end) { return {Shape::Linear, start, end}; }
  static Schedule geometric(double start, double end) {
    if (!(start > 0 && end > 0)) throw std::invalid_argument("geometric schedule needs positive endpoints");
    return {Shape::Geometric, start, end};
  }

  /// Value at step `t` of `total`; step 0 gives start, step total-1 gives end.
  double at(std::size_t t, std::size_t total) const {
    if (shape_ == Shape::Constant || total <= 1) return start_;
    const double x = static_cast<double>(t) / static_cast<double>(total - 1);
    if (shape_ == Shape::Linear) return start_ + (end_ - start_) * x;
    return start_ * std::pow(end_ / start_, x);
  }

  double start() const { return start_; }
  double end() const { return end_; }
  Shape shape() const { return shape_; }
  bool nondecreasing() const { return shape_ == Shape::Constant || end_ >= start_; }

 private:
  Schedule(Shape shape, double start, double end) : shape_(shape), start_(start), end_(end) {
    if (!std::isfinite(start) || !std::isfinite(end)) throw std::invalid_argument("schedule endpoints must be finite");
  }

  Shape shape_;
  double start_;
  double end_;
};

}  // namespace pcomp
