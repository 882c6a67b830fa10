// Seedable uniform random sources for p-bit emulation.
//
// Three backends share one interface (uniform01): a 32-stage Fibonacci LFSR
// matching the CMOS p-bit path, a long-period Mersenne Twister, and a
// counter-based SplitMix64 stream used to derive independent chain seeds.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace pcomp {

/// Anything that hands out uniform variates in [0,1).
template <typename R>
concept UniformSource = requires(R& r) {
  { r.uniform01() } -> std::same_as<double>;
};

// ---------------------------------------------------------------------------
// LFSR

struct LfsrStep {
  unsigned bit;
  std::uint32_t state;
};

/// Fibonacci LFSR over the low `Width` bits of `UInt`.
///
/// Tap positions are 1-based (position p is bit p-1, position Width is the
/// MSB). Each step XORs the tap bits, shifts the register left and inserts
/// the feedback bit at position 1; the feedback bit is also the output.
template <std::unsigned_integral UInt, unsigned Width, unsigned... Taps>
class FibonacciLfsr {
  static_assert(Width >= 2 && Width <= sizeof(UInt) * 8);
  static_assert(((Taps >= 1 && Taps <= Width) && ...));

 public:
  static constexpr UInt kMask =
      Width == sizeof(UInt) * 8 ? static_cast<UInt>(~UInt{0})
                                : static_cast<UInt>((UInt{1} << Width) - 1);

  explicit FibonacciLfsr(UInt state) : state_(state & kMask) {
    if (state_ == 0) throw std::invalid_argument("LFSR state must be nonzero");
  }

  static constexpr unsigned feedback(UInt s) {
    return static_cast<unsigned>(((s >> (Taps - 1)) ^ ...) & 1u);
  }

  unsigned next_bit() {
    const unsigned bit = feedback(state_);
    state_ = static_cast<UInt>(((state_ << 1) | bit) & kMask);
    return bit;
  }

  UInt state() const { return state_; }

 private:
  UInt state_;
};

using Lfsr32 = FibonacciLfsr<std::uint32_t, 32, 32, 22, 2, 1>;
using Lfsr16 = FibonacciLfsr<std::uint16_t, 16, 16, 15, 13, 4>;

/// One step of the 32-stage register with taps {32,22,2,1}.
inline LfsrStep lfsr32_next(std::uint32_t state) {
  Lfsr32 reg(state);
  const unsigned bit = reg.next_bit();
  return {bit, reg.state()};
}

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Uniform source built on Lfsr32; 32 consecutive bits form one word,
/// first bit in the MSB.
class Lfsr32Engine {
 public:
  explicit Lfsr32Engine(std::uint64_t seed) : reg_(seed_state(seed)) {}

  std::uint32_t next_word() {
    std::uint32_t word = 0;
    for (int k = 0; k < 32; ++k) word = (word << 1) | reg_.next_bit();
    return word;
  }

  double uniform01() { return static_cast<double>(next_word()) * 0x1.0p-32; }

  std::uint32_t state() const { return reg_.state(); }

 private:
  static std::uint32_t seed_state(std::uint64_t seed) {
    auto s = static_cast<std::uint32_t>(detail::mix64(seed));
    return s == 0 ? 0xACE1ACE1u : s;
  }

  Lfsr32 reg_;
};

class LongPeriodEngine {
 public:
  explicit LongPeriodEngine(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return detail::u64_to_unit(gen_()); }

 private:
  std::mt19937_64 gen_;
};

/// Counter-based stream: output n is mix64(key + n * golden).
///
/// Random access by counter makes stream splitting trivial: chain i of a run
/// seeded with `master` receives `CounterEngine::split(master, i)`.
class CounterEngine {
 public:
  explicit CounterEngine(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  double uniform01() { return detail::u64_to_unit(next_u64()); }

  static std::uint64_t split(std::uint64_t master, std::uint64_t index) {
    return CounterEngine(detail::mix64(master ^ 0x70636F6D70ull), index).next_u64();
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

// ---------------------------------------------------------------------------
// Runtime-selected backend

enum class RngKind { Lfsr32, LongPeriod, Counter };

inline RngKind parse_rng_kind(std::string_view name) {
  if (name == "lfsr32") return RngKind::Lfsr32;
  if (name == "longperiod") return RngKind::LongPeriod;
  if (name == "counter") return RngKind::Counter;
  throw std::invalid_argument("unknown RNG backend '" + std::string(name) +
                              "' (expected lfsr32, longperiod or counter)");
}

inline std::string_view to_string(RngKind kind) {
  switch (kind) {
    case RngKind::Lfsr32: return "lfsr32";
    case RngKind::LongPeriod: return "longperiod";
    case RngKind::Counter: return "counter";
  }
  return "?";
}

class RngBackend {
 public:
  RngBackend(RngKind kind, std::uint64_t seed) : kind_(kind), seed_(seed), engine_(make(kind, seed)) {}

  double uniform01() {
    return std::visit([](auto& e) { return e.uniform01(); }, engine_);
  }

  RngKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

 private:
  using Engine = std::variant<Lfsr32Engine, LongPeriodEngine, CounterEngine>;

  static Engine make(RngKind kind, std::uint64_t seed) {
    switch (kind) {
      case RngKind::Lfsr32: return Lfsr32Engine(seed);
      case RngKind::LongPeriod: return LongPeriodEngine(seed);
      case RngKind::Counter: return CounterEngine(seed);
    }
    throw std::invalid_argument("bad RNG kind");
  }

  RngKind kind_;
  std::uint64_t seed_;
  Engine engine_;
};

/// Uniform index in [0, n) from one variate.
template <UniformSource Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  const auto k = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
  return std::min(k, n - 1);
}

}  // namespace pcomp
