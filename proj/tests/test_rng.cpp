#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "difftest/rng.hpp"

using namespace difftest;

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(124);
  Rng d(123);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(Rng, UniformOpenInterval) {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(Rng, NormalMoments) {
  Rng r(99);
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  // SEs: 1/sqrt(n), sqrt(2/n), sqrt(96/n)
  EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Rng, DerivedSeedsAreDistinctAndOrderSensitive) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 2000; ++r) seen.insert(derive_seed(1, {hash_tag("OU"), 50, r}));
  EXPECT_EQ(seen.size(), 2000u);
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_EQ(derive_seed(5, {6, 7}), derive_seed(5, {6, 7}));
  EXPECT_NE(hash_tag("null"), hash_tag("power"));
}
