#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pcomp/pbit.hpp"
#include "pcomp/rng.hpp"
#include "pcomp/schedule.hpp"

using namespace pcomp;

namespace {

// Bit-array model of the 32-stage register: cell[p-1] holds tap position p.
struct ReferenceLfsr {
  std::array<unsigned, 32> cell{};

  explicit ReferenceLfsr(std::uint32_t s) {
    for (int p = 0; p < 32; ++p) cell[p] = (s >> p) & 1u;
  }
  unsigned step() {
    const unsigned fb = cell[31] ^ cell[21] ^ cell[1] ^ cell[0];
    for (int p = 31; p > 0; --p) cell[p] = cell[p - 1];
    cell[0] = fb;
    return fb;
  }
  std::uint32_t value() const {
    std::uint32_t s = 0;
    for (int p = 0; p < 32; ++p) s |= static_cast<std::uint32_t>(cell[p]) << p;
    return s;
  }
};

}  // namespace

TEST(Lfsr, AllOnesShiftsInZero) {
  const auto r = lfsr32_next(0xFFFFFFFFu);
  EXPECT_EQ(r.bit, 0u);
  EXPECT_EQ(r.state, 0xFFFFFFFEu);
}

TEST(Lfsr, MatchesBitLevelReference) {
  for (std::uint32_t seed : {1u, 0xFFFFFFFFu, 0x80000000u, 0xDEADBEEFu, 0x12345678u}) {
    ReferenceLfsr ref(seed);
    std::uint32_t s = seed;
    for (int k = 0; k < 5000; ++k) {
      const auto r = lfsr32_next(s);
      ASSERT_EQ(r.bit, ref.step());
      ASSERT_EQ(r.state, ref.value());
      s = r.state;
    }
  }
}

TEST(Lfsr, ZeroStateRejected) {
  EXPECT_THROW(lfsr32_next(0), std::invalid_argument);
  EXPECT_THROW(Lfsr16(0), std::invalid_argument);
  EXPECT_THROW(Lfsr32(0), std::invalid_argument);
}

TEST(Lfsr, SixteenBitVariantHasFullPeriod) {
  for (std::uint16_t seed : {std::uint16_t{1}, std::uint16_t{0xACE1}, std::uint16_t{0xFFFF}, std::uint16_t{0x8000}}) {
    Lfsr16 reg(seed);
    std::vector<bool> seen(1u << 16, false);
    std::size_t period = 0;
    while (!seen[reg.state()]) {
      seen[reg.state()] = true;
      reg.next_bit();
      ++period;
      ASSERT_NE(reg.state(), 0u);
    }
    EXPECT_EQ(period, 65535u);
    EXPECT_EQ(reg.state(), seed);
  }
}

TEST(Lfsr, WordsAreAssembledMsbFirst) {
  Lfsr32Engine eng(99);
  Lfsr32 reg(eng.state());
  for (int w = 0; w < 100; ++w) {
    std::uint32_t expect = 0;
    for (int k = 0; k < 32; ++k) expect |= static_cast<std::uint32_t>(reg.next_bit()) << (31 - k);
    ASSERT_EQ(eng.next_word(), expect);
  }
}

TEST(Lfsr, WordStreamMeanAndLagOneAutocorrelation) {
  Lfsr32Engine eng(20211);
  const std::size_t n = 1000000;
  double sum = 0, sum_sq = 0, lag = 0, prev = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = eng.uniform01();
    sum += u;
    sum_sq += u * u;
    if (k) lag += u * prev;
    prev = u;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double rho = (lag / (n - 1) - mean * mean) / var;
  EXPECT_NEAR(mean, 0.5, 0.002);
  EXPECT_LT(std::abs(rho), 0.01);
}

class Backends : public ::testing::TestWithParam<RngKind> {};

TEST_P(Backends, EqualSeedsGiveEqualStreams) {
  RngBackend a(GetParam(), 77), b(GetParam(), 77), c(GetParam(), 78);
  bool differs = false;
  for (int k = 0; k < 10000; ++k) {
    const double x = a.uniform01();
    ASSERT_EQ(x, b.uniform01());
    differs |= x != c.uniform01();
  }
  EXPECT_TRUE(differs);
}

TEST_P(Backends, UniformRangeAndMean) {
  RngBackend rng(GetParam(), 5);
  double sum = 0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.002);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, Backends,
                         ::testing::Values(RngKind::Lfsr32, RngKind::LongPeriod, RngKind::Counter));

TEST(Backend, NamesRoundTrip) {
  for (auto k : {RngKind::Lfsr32, RngKind::LongPeriod, RngKind::Counter}) EXPECT_EQ(parse_rng_kind(to_string(k)), k);
  EXPECT_THROW(parse_rng_kind("xorshift"), std::invalid_argument);
  RngBackend b(RngKind::Counter, 42);
  EXPECT_EQ(b.kind(), RngKind::Counter);
  EXPECT_EQ(b.seed(), 42u);
}

TEST(Backend, CounterSplitGivesDistinctSeeds) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.push_back(CounterEngine::split(20211, i));
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
  EXPECT_NE(CounterEngine::split(1, 0), CounterEngine::split(2, 0));
}

TEST(Backend, UniformIndexStaysInRange) {
  struct Top {
    double uniform01() { return std::nextafter(1.0, 0.0); }
  } top;
  EXPECT_EQ(uniform_index(top, 7), 6u);
}

// ---------------------------------------------------------------------------

TEST(PBit, Examples) {
  EXPECT_EQ(pbit_sample(0.0, 0.3), 1u);
  for (double u : {0.0, 0.5, 0.9, 0.999}) EXPECT_EQ(pbit_sample(20.0, u), 1u);
  EXPECT_NEAR(sigmoid(2.0), 0.8808, 1e-4);
  EXPECT_EQ(pbit_sample(2.0, 0.9), 0u);
}

TEST(PBit, StrictInequalityAtZero) {
  EXPECT_EQ(pbit_sample(-800.0, 0.0), 0u);
  EXPECT_EQ(pbit_sample(0.0, 0.5), 0u);
}

TEST(PBit, Errors) {
  EXPECT_THROW(pbit_sample(std::numeric_limits<double>::quiet_NaN(), 0.5), std::domain_error);
  EXPECT_THROW(pbit_sample(std::numeric_limits<double>::infinity(), 0.5), std::domain_error);
  EXPECT_THROW(pbit_sample(0.0, 1.0), std::domain_error);
  EXPECT_THROW(pbit_sample(0.0, -0.1), std::domain_error);
}

TEST(PBit, MonotoneInInput) {
  RngBackend rng(RngKind::LongPeriod, 3);
  for (int t = 0; t < 1000; ++t) {
    const double u = rng.uniform01();
    unsigned prev = 0;
    for (double in = -10; in <= 10; in += 0.05) {
      const unsigned s = pbit_sample(in, u);
      ASSERT_GE(s, prev);
      prev = s;
    }
  }
}

TEST(PBit, SigmoidAndLogitAreInverse) {
  for (double p : {1e-9, 0.1, 0.5, 0.75, 1 - 1e-9}) EXPECT_NEAR(sigmoid(logit(p)), p, 1e-12);
  EXPECT_GE(sigmoid(-1000), 0.0);
  EXPECT_EQ(sigmoid(1000), 1.0);
}

TEST(PBit, MeanConvergesToSigmoid) {
  const std::size_t ns = 10000;
  for (double in : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
    const double p = sigmoid(in);
    const double bound = 3 * std::sqrt(p * (1 - p) / ns);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RngBackend rng(RngKind::LongPeriod, seed);
      std::size_t ones = 0;
      for (std::size_t k = 0; k < ns; ++k) ones += pbit_sample(in, rng.uniform01());
      inside += std::abs(static_cast<double>(ones) / ns - p) <= bound;
    }
    EXPECT_GE(inside, 99) << "I = " << in;
  }
}

TEST(PBitVector, FairArrayMean) {
  RngBackend rng(RngKind::LongPeriod, 11);
  const std::vector<double> zeros(1000, 0.0);
  std::size_t ones = 0, total = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto v = pbit_array_sample(zeros, rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_TRUE(v[i] == 0 || v[i] == 1);
      ones += v[i];
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(ones) / total, 0.5, 0.005);
}

TEST(PBitVector, RecordsInputsAndReplays) {
  const std::vector<double> in{-1.0, 0.0, 3.0, -7.5};
  RngBackend a(RngKind::Lfsr32, 9), b(RngKind::Lfsr32, 9);
  const auto x = pbit_array_sample(in, a);
  const auto y = pbit_array_sample(in, b);
  ASSERT_EQ(x.size(), 4u);
  EXPECT_TRUE(std::equal(x.outputs().begin(), x.outputs().end(), y.outputs().begin()));
  EXPECT_TRUE(std::equal(x.inputs().begin(), x.inputs().end(), in.begin()));
}

TEST(PBitVector, OneUniformPerBitInIndexOrder) {
  const std::vector<double> in{0.3, -0.2, 1.1};
  RngBackend a(RngKind::Counter, 4), b(RngKind::Counter, 4);
  const auto v = pbit_array_sample(in, a);
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(v[i], pbit_sample(in[i], b.uniform01()));
  EXPECT_EQ(a.uniform01(), b.uniform01());
}

TEST(PBitVector, Errors) {
  EXPECT_THROW(PBitVector(0), std::invalid_argument);
  RngBackend rng(RngKind::Counter, 1);
  EXPECT_THROW(pbit_array_sample(std::vector<double>{}, rng), std::invalid_argument);
  PBitVector v(3);
  EXPECT_THROW(v.sample(std::vector<double>{0.0, 0.0}, rng), std::invalid_argument);
  EXPECT_THROW(v.sample(std::vector<double>{0.0, std::nan(""), 0.0}, rng), std::domain_error);
}

// ---------------------------------------------------------------------------

TEST(Schedule, Shapes) {
  const auto c = Schedule::constant(2.5);
  EXPECT_EQ(c.at(0, 10), 2.5);
  EXPECT_EQ(c.at(9, 10), 2.5);
  const auto l = Schedule::linear(1, 3);
  EXPECT_DOUBLE_EQ(l.at(0, 5), 1);
  EXPECT_DOUBLE_EQ(l.at(2, 5), 2);
  EXPECT_DOUBLE_EQ(l.at(4, 5), 3);
  const auto g = Schedule::geometric(0.001, 10);
  EXPECT_DOUBLE_EQ(g.at(0, 3), 0.001);
  EXPECT_NEAR(g.at(1, 3), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(g.at(2, 3), 10);
  EXPECT_TRUE(g.nondecreasing());
  EXPECT_FALSE(Schedule::linear(3, 1).nondecreasing());
  EXPECT_EQ(l.at(0, 1), 1);
  EXPECT_THROW(Schedule::geometric(0, 1), std::invalid_argument);
  EXPECT_THROW(Schedule::linear(0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}
