// RNG -> kernel -> data collector pipeline.
//
// A kernel receives the p-bit vector drawn from the inputs it asked for on the
// previous step, updates its own state deterministically and returns the next
// inputs plus one observable record. The engine owns the loop, burn-in,
// thinning and the per-chain random streams; the collector merges statistics
// across chains.

#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pcomp/pbit.hpp"
#include "pcomp/rng.hpp"

namespace pcomp::engine {

inline constexpr std::uint64_t kDefaultSeed = 20211;

struct RunConfig {
  std::size_t samples = 1;
  std::size_t chains = 1;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::uint64_t master_seed = kDefaultSeed;
  RngKind backend = RngKind::LongPeriod;
  bool concurrent = false;
  bool keep_trace = true;

  void validate() const {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (chains < 1) throw std::invalid_argument("chains must be >= 1");
    if (thinning < 1) throw std::invalid_argument("thinning must be >= 1");
  }

  std::size_t total_steps() const { return burn_in + samples * thinning; }
};

/// Seed of chain `index` in a run keyed by `master`.
inline std::uint64_t chain_seed(std::uint64_t master, std::size_t index) {
  return CounterEngine::split(master, index);
}

struct StepOutput {
  std::vector<double> next_inputs;
  std::vector<double> observables;
};

template <typename K>
concept Kernel = requires(const K& k, typename K::State& state, const typename K::State& cstate,
                          const PBitVector& pbits, StepOutput& out) {
  { k.initial_state() } -> std::convertible_to<typename K::State>;
  { k.initial_inputs(cstate) } -> std::convertible_to<std::vector<double>>;
  { k.observable_names() } -> std::convertible_to<std::vector<std::string>>;
  k.step(pbits, state, out);
};

// ---------------------------------------------------------------------------
// Data collector

class SampleStats {
 public:
  SampleStats() = default;
  explicit SampleStats(std::vector<std::string> names, bool with_histogram = false)
      : names_(std::move(names)), sum_(names_.size(), 0.0L), comp_(names_.size(), 0.0L), mean_(names_.size(), 0.0),
        m2_(names_.size(), 0.0) {
    if (with_histogram) histogram_.emplace(names_.size());
  }

  void add(const std::vector<double>& record) {
    if (record.size() != names_.size())
      throw std::invalid_argument("observable record has " + std::to_string(record.size()) +
                                  " fields, schema has " + std::to_string(names_.size()));
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < record.size(); ++i) {
      add_compensated(i, record[i]);
      const double delta = record[i] - mean_[i];
      mean_[i] += delta / n;
      m2_[i] += delta * (record[i] - mean_[i]);
      if (histogram_) ++(*histogram_)[i][record[i]];
    }
  }

  /// Pairwise combination; sums add, M2 uses the parallel-variance update.
  friend SampleStats merge(const SampleStats& a, const SampleStats& b) {
    if (a.names_ != b.names_) throw std::invalid_argument("cannot merge stats with different observable schemas");
    if (a.histogram_.has_value() != b.histogram_.has_value())
      throw std::invalid_argument("cannot merge stats with and without histograms");
    if (b.count_ == 0) return a;
    if (a.count_ == 0) return b;
    SampleStats out = a;
    const double na = static_cast<double>(a.count_);
    const double nb = static_cast<double>(b.count_);
    out.count_ = a.count_ + b.count_;
    const double n = static_cast<double>(out.count_);
    for (std::size_t i = 0; i < a.names_.size(); ++i) {
      out.add_compensated(i, b.sum_[i]);
      out.add_compensated(i, b.comp_[i]);
      const double delta = b.mean_[i] - a.mean_[i];
      out.mean_[i] = a.mean_[i] + delta * (nb / n);
      out.m2_[i] = a.m2_[i] + b.m2_[i] + delta * delta * (na * nb / n);
      if (out.histogram_)
        for (const auto& [value, c] : (*b.histogram_)[i]) (*out.histogram_)[i][value] += c;
    }
    return out;
  }

  std::uint64_t count() const { return count_; }
  const std::vector<std::string>& names() const { return names_; }
  double sum(std::size_t i) const { return static_cast<double>(sum_.at(i) + comp_.at(i)); }
  double mean(std::size_t i) const {
    return count_ ? static_cast<double>((sum_.at(i) + comp_.at(i)) / static_cast<long double>(count_)) : 0.0;
  }
  double m2(std::size_t i) const { return m2_.at(i); }
  /// Unbiased sample variance.
  double variance(std::size_t i) const {
    return count_ > 1 ? m2_.at(i) / static_cast<double>(count_ - 1) : 0.0;
  }
  double stderr_of_mean(std::size_t i) const {
    return count_ > 1 ? std::sqrt(variance(i) / static_cast<double>(count_)) : 0.0;
  }
  const std::optional<std::vector<std::map<double, std::uint64_t>>>& histogram() const { return histogram_; }

 private:
  // Neumaier summation in extended precision, so the mean does not depend on
  // how a stream was split across chains.
  void add_compensated(std::size_t i, long double x) {
    const long double t = sum_[i] + x;
    comp_[i] += std::abs(sum_[i]) >= std::abs(x) ? (sum_[i] - t) + x : (x - t) + sum_[i];
    sum_[i] = t;
  }

  std::vector<std::string> names_;
  std::uint64_t count_ = 0;
  std::vector<long double> sum_;
  std::vector<long double> comp_;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::optional<std::vector<std::map<double, std::uint64_t>>> histogram_;
};

// ---------------------------------------------------------------------------
// Chains

struct ChainResult {
  SampleStats stats;
  std::vector<std::vector<double>> trace;
  std::size_t steps = 0;
  bool valid = true;
  std::string error;
};

/// Feedback loop: sample p-bits, step the kernel, keep every thinning-th
/// record after burn-in. A throwing kernel ends the chain with valid = false.
template <Kernel K, UniformSource Rng>
ChainResult run_chain(const K& kernel, const RunConfig& config, Rng& rng) {
  config.validate();
  ChainResult result{SampleStats(kernel.observable_names()), {}, 0, true, {}};
  try {
    typename K::State state = kernel.initial_state();
    std::vector<double> inputs = kernel.initial_inputs(state);
    PBitVector pbits(inputs.size());
    StepOutput out;
    const std::size_t total = config.total_steps();
    for (std::size_t t = 0; t < total; ++t) {
      pbits.sample(inputs, rng);
      kernel.step(pbits, state, out);
      ++result.steps;
      if (t >= config.burn_in && (t - config.burn_in + 1) % config.thinning == 0) {
        result.stats.add(out.observables);
        if (config.keep_trace) result.trace.push_back(out.observables);
      }
      std::swap(inputs, out.next_inputs);
      if (inputs.size() != pbits.size()) pbits = PBitVector(inputs.size());
    }
  } catch (const std::exception& e) {
    result.valid = false;
    result.error = e.what();
  }
  return result;
}

class ChainFailure : public std::runtime_error {
 public:
  ChainFailure(std::vector<std::size_t> failed, const std::string& first_error)
      : std::runtime_error(describe(failed, first_error)), failed_(std::move(failed)) {}
  const std::vector<std::size_t>& failed_chains() const { return failed_; }

 private:
  static std::string describe(const std::vector<std::size_t>& failed, const std::string& first_error) {
    std::ostringstream os;
    os << "chain failure in chains [";
    for (std::size_t i = 0; i < failed.size(); ++i) os << (i ? "," : "") << failed[i];
    os << "]: " << first_error;
    return os.str();
  }
  std::vector<std::size_t> failed_;
};

/// Runs config.chains independent chains, chain i seeded with
/// chain_seed(master_seed, i). Results are in chain order whether or not the
/// chains ran on separate threads.
template <Kernel K>
std::vector<ChainResult> run_chains(const K& kernel, const RunConfig& config) {
  config.validate();
  std::vector<ChainResult> results(config.chains);
  auto run_one = [&](std::size_t i) {
    RngBackend rng(config.backend, chain_seed(config.master_seed, i));
    results[i] = run_chain(kernel, config, rng);
  };
  if (config.concurrent && config.chains > 1) {
    std::vector<std::jthread> workers;
    workers.reserve(config.chains);
    for (std::size_t i = 0; i < config.chains; ++i) workers.emplace_back(run_one, i);
  } else {
    for (std::size_t i = 0; i < config.chains; ++i) run_one(i);
  }
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (!results[i].valid) failed.push_back(i);
  if (!failed.empty()) throw ChainFailure(failed, results[failed.front()].error);
  return results;
}

inline SampleStats merge_all(const std::vector<ChainResult>& chains) {
  SampleStats total = chains.at(0).stats;
  for (std::size_t i = 1; i < chains.size(); ++i) total = merge(total, chains[i].stats);
  return total;
}

template <Kernel K>
SampleStats run_parallel(const K& kernel, const RunConfig& config) {
  return merge_all(run_chains(kernel, config));
}

// ---------------------------------------------------------------------------
// Throughput

struct ThroughputReport {
  std::uint64_t total_samples = 0;
  double elapsed_seconds = 0;
  double samples_per_second = 0;
  std::optional<double> clock_hz;
  std::optional<double> ideal_samples_per_second;  // N_p * f_c
};

inline ThroughputReport throughput_report(double elapsed_seconds, const RunConfig& config,
                                          std::optional<double> clock_hz = std::nullopt) {
  if (!(elapsed_seconds > 0)) throw std::invalid_argument("elapsed time must be positive");
  ThroughputReport r;
  r.total_samples = static_cast<std::uint64_t>(config.chains) * config.samples;
  r.elapsed_seconds = elapsed_seconds;
  r.samples_per_second = static_cast<double>(r.total_samples) / elapsed_seconds;
  if (clock_hz) {
    r.clock_hz = clock_hz;
    r.ideal_samples_per_second = static_cast<double>(config.chains) * *clock_hz;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reference kernels

/// N free-running fair p-bits (all inputs zero); the observable is bit 0.
class IdentityKernel {
 public:
  struct State {};

  explicit IdentityKernel(std::size_t bits = 1) : bits_(bits) {
    if (bits == 0) throw std::invalid_argument("identity kernel needs at least one bit");
  }

  State initial_state() const { return {}; }
  std::vector<double> initial_inputs(const State&) const { return std::vector<double>(bits_, 0.0); }
  std::vector<std::string> observable_names() const { return {"bit0"}; }

  void step(const PBitVector& pbits, State&, StepOutput& out) const {
    out.next_inputs.assign(bits_, 0.0);
    out.observables.assign(1, static_cast<double>(pbits[0]));
  }

 private:
  std::size_t bits_;
};

}  // namespace pcomp::engine
