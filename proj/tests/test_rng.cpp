#include "trajlab/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using trajlab::RngStream;
using trajlab::derive_stream;

TEST(Rng, SameSeedSameSequence) {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DerivedStreamsDiffer) {
  const auto s1 = derive_stream(7, 0, 0, 0);
  const auto s2 = derive_stream(7, 0, 0, 1);
  const auto s3 = derive_stream(7, 0, 1, 0);
  const auto s4 = derive_stream(8, 0, 0, 0);
  EXPECT_NE(s1, s2);
  EXPECT_NE(s1, s3);
  EXPECT_NE(s1, s4);
  EXPECT_NE(s2, s3);
}

TEST(Rng, UniformRange) {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIntRange) {
  RngStream rng(2);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const int v = rng.uniform_int(10);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 10);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, NormalMoments) {
  RngStream rng(3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}
