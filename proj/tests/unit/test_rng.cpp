#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "shredrom/rng.hpp"

using namespace shredrom;

TEST(Rng, KnownSplitMix64Outputs) {
  // Reference stream of the canonical SplitMix64 seeded with 0.
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(g(), 0x06C45D188009454FULL);
}

TEST(Rng, CounterAddressable) {
  SplitMix64 a(42);
  for (int i = 0; i < 10; ++i) a();
  SplitMix64 b(42, 10);
  EXPECT_EQ(a(), b());
}

TEST(Rng, DeriveSeedChildrenDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t c = 0; c < 1000; ++c) seen.insert(derive_seed(5, c));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(5, 0), derive_seed(6, 0));
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST(Rng, UniformAndNormalMoments) {
  SplitMix64 g(7);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = g.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(double(n)));
  EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}
