#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "spiro/errors.hpp"
#include "spiro/quantizer.hpp"

namespace spiro {
namespace {

// Bin by scanning explicit edges: [e_i, e_{i+1}), last bin closed on top.
int enumerate_bin(double v, int bins, double v_max) {
  v = std::clamp(v, -v_max, v_max);
  const double w = 2.0 * v_max / bins;
  for (int i = 0; i < bins; ++i) {
    const double lo = -v_max + i * w;
    const double hi = -v_max + (i + 1) * w;
    if (v >= lo && (v < hi || i == bins - 1)) return i;
  }
  return -1;
}

TEST(Quantizer, CornerAndMidpointTokens) {
  const Quantizer q(16, 1.0);
  EXPECT_EQ(q.vocab_size(), 256);
  EXPECT_EQ(q.encode(-1.0, -1.0), 0);
  EXPECT_EQ(q.encode(1.0, 1.0), 255);
  const int mid = enumerate_bin(0.0, 16, 1.0);
  EXPECT_EQ(mid, 8);
  EXPECT_EQ(q.encode(0.0, 0.0), mid * 16 + mid);
  EXPECT_EQ(q.encode(0.0, 0.0), 136);
}

TEST(Quantizer, MatchesEdgeEnumeration) {
  const Quantizer q(16, 1.0);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(gen);
    EXPECT_EQ(q.bin_of(v), enumerate_bin(v, 16, 1.0)) << v;
  }
}

TEST(Quantizer, FirstBinCenter) {
  const Quantizer q(16, 1.0);
  const double w = 2.0 / 16;
  const auto c = q.decode(0);
  EXPECT_DOUBLE_EQ(c[0], -1.0 + w / 2);
  EXPECT_DOUBLE_EQ(c[1], -1.0 + w / 2);
}

TEST(Quantizer, CentersReencodeToThemselves) {
  for (int bins : {1, 2, 7, 16, 31}) {
    const Quantizer q(bins, 2.5);
    for (int id = 0; id < q.vocab_size(); ++id) {
      const auto c = q.decode(id);
      EXPECT_EQ(q.encode(c[0], c[1]), id);
    }
  }
}

TEST(Quantizer, RoundTripWithinHalfBin) {
  const Quantizer q(16, 1.0);
  const double half = q.bin_width() / 2;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100000; ++i) {
    const double a = u(gen);
    const double b = u(gen);
    const int id = q.encode(a, b);
    ASSERT_GE(id, 0);
    ASSERT_LT(id, q.vocab_size());
    const auto c = q.decode(id);
    EXPECT_LE(std::abs(c[0] - std::clamp(a, -1.0, 1.0)), half + 1e-15);
    EXPECT_LE(std::abs(c[1] - std::clamp(b, -1.0, 1.0)), half + 1e-15);
  }
}

TEST(Quantizer, Errors) {
  const Quantizer q(16, 1.0);
  EXPECT_THROW(q.decode(-1), std::out_of_range);
  EXPECT_THROW(q.decode(256), std::out_of_range);
  EXPECT_THROW(Quantizer(0, 1.0), ConfigError);
  EXPECT_THROW(Quantizer(16, 0.0), ConfigError);
  EXPECT_EQ(q.encode(INFINITY, -INFINITY), 15 * 16);
  EXPECT_THROW(q.encode(std::nan(""), 0.0), DomainError);
}

}  // namespace
}  // namespace spiro
