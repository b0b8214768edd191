#include <set>
#include <stdexcept>

#include "doctest.h"
#include "hcmm/rng.hpp"

using hcmm::Rng;

TEST_SUITE("rng") {
  TEST_CASE("equal seeds give equal sequences") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
  }

  TEST_CASE("streams and seeds separate sequences") {
    Rng a(42, 0), b(42, 1), c(43, 0);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 100; ++i) {
      const auto x = a(), y = b(), z = c();
      same_ab += x == y;
      same_ac += x == z;
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
  }

  TEST_CASE("substream depends only on parent identity") {
    Rng parent(7, 3);
    const Rng before = parent.substream(5);
    for (int i = 0; i < 17; ++i) parent.uniform();
    Rng after = parent.substream(5);
    Rng b = before;
    for (int i = 0; i < 100; ++i) CHECK(after() == b());
  }

  TEST_CASE("nested substreams are distinct") {
    const Rng root(1);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 20; ++i) {
      for (std::uint64_t j = 0; j < 20; ++j) {
        Rng r = root.substream(i).substream(j);
        firsts.insert(r());
      }
    }
    CHECK(firsts.size() == 400);
  }

  TEST_CASE("uniform lies in [0, 1) with the right mean") {
    Rng r(9);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  }

  TEST_CASE("below is uniform over its range") {
    Rng r(11);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
      const auto v = r.below(7);
      REQUIRE(v < 7);
      ++counts[v];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK_THROWS_AS(r.below(0), std::invalid_argument);
  }

  TEST_CASE("normal has unit variance") {
    Rng r(12);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = r.normal();
      s += z;
      s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("bernoulli extremes") {
    Rng r(13);
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(r.bernoulli(0.0));
      CHECK(r.bernoulli(1.0));
    }
  }
}
