#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gofscreen/rng.hpp"
#include "oracles/ks.hpp"

using namespace gofscreen;

TEST_CASE("philox matches the published known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform draws pass a KS test and stay in range") {
  Philox rng(7);
  std::vector<double> u(100000);
  for (auto& v : u) {
    v = rng.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
  CHECK(oracle::ks_pvalue(oracle::ks_uniform_statistic(u, 0, 1), 1e5) > 1e-3);
  for (int i = 0; i < 10000; ++i) REQUIRE(rng.uniform_open() > 0.0);
}

TEST_CASE("distribution moments") {
  Philox rng(11);
  const int n = 400000;
  double s = 0, s2 = 0, l2 = 0, pm = 0, pv = 0, pm_big = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double l = rng.laplace(2.0);
    l2 += l * l;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1) < 0.01);
  // Laplace(0, b) has variance 2 b^2.
  CHECK(std::abs(l2 / n - 8) < 0.1);
  std::vector<double> draws(n);
  for (auto& v : draws) v = static_cast<double>(rng.poisson(3.5));
  pm = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  for (double v : draws) pv += (v - pm) * (v - pm) / n;
  CHECK(std::abs(pm - 3.5) < 0.02);
  CHECK(std::abs(pv - 3.5) < 0.05);
  for (int i = 0; i < n; ++i) pm_big += static_cast<double>(rng.poisson(40.0)) / n;
  CHECK(std::abs(pm_big - 40) < 0.05);
}

TEST_CASE("below is unbiased and shuffle permutes") {
  Philox rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);

  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  shuffle(std::span<int>(w), rng);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("mix_seed spreads nearby seeds") {
  CHECK(mix_seed(0) != mix_seed(1));
  CHECK(mix_seed(1) == mix_seed(1));
  CHECK(std::popcount(mix_seed(1) ^ mix_seed(2)) > 10);
}
