#include <cmath>
#include <vector>

#include "doctest.h"
#include "hcmm/allocator.hpp"
#include "hcmm/budget.hpp"
#include "hcmm/scenarios.hpp"
#include "oracles.hpp"

using namespace hcmm;

namespace {

using Counts = std::vector<std::int64_t>;

BudgetScenario scenario_1(double budget = 860) {
  return BudgetScenario({{0.5, 2, 10}, {0.25, 4, 10}}, {1, 2}, 100, budget);
}

BudgetScenario scenario_2(double budget = 475) {
  return BudgetScenario({{1, 1, 10}, {0.5, 2, 10}, {0.125, 8, 10}}, {1, 2}, 100, budget);
}

}  // namespace

TEST_SUITE("budget") {
  TEST_CASE("x_xi root") {
    CHECK(solve_x_xi(1.0) == doctest::Approx(oracle::kXXi1).epsilon(1e-14));
    CHECK(std::abs(std::exp(oracle::kXXi1 - 2.0) - oracle::kXXi1) < 1e-12);
    for (double xi : {1e-3, 0.1, 1.0, 5.0, 50.0, 500.0}) {
      const double x = solve_x_xi(xi);
      CHECK(x > 1.0);
      CHECK(std::abs(x - xi - 1.0 - std::log(x)) < 1e-10 * x);
      const auto w = solve_lambda(RuntimeModel::exponential(xi, 1.0));
      CHECK(std::abs(1.0 + w.lambda - x) < 1e-9 * x);
    }
    CHECK_THROWS_AS(solve_x_xi(0.0), std::invalid_argument);
  }

  TEST_CASE("machine cost rate") {
    CHECK(machine_cost_rate(2, {1, 2}) == 4.0);
    CHECK(machine_cost_rate(4, {1, 2}) == 16.0);
    CHECK(machine_cost_rate(3, {2, 1}) == 6.0);
  }

  TEST_CASE("scenario 1 cost and time table") {
    const auto s = scenario_1();
    CHECK(hcmm_expected_cost(Counts{10, 10}, s) == doctest::Approx(1048.731073540194).epsilon(1e-13));
    CHECK(hcmm_expected_cost(Counts{10, 9}, s) == doctest::Approx(1033.7492010610486).epsilon(1e-13));
    CHECK(hcmm_expected_cost(Counts{10, 8}, s) == doctest::Approx(1016.4624251235728).epsilon(1e-13));
    CHECK(hcmm_expected_cost(Counts{10, 3}, s) == doctest::Approx(865.2031356706602).epsilon(1e-13));
    CHECK(hcmm_expected_cost(Counts{10, 2}, s) == doctest::Approx(809.021113873864).epsilon(1e-13));
    CHECK(expected_time(Counts{10, 10}, s) == doctest::Approx(5.2436553677009705).epsilon(1e-13));
    CHECK(expected_time(Counts{10, 3}, s) == doctest::Approx(9.83185381443932).epsilon(1e-13));
    CHECK(expected_time(Counts{10, 2}, s) == doctest::Approx(11.236404359359224).epsilon(1e-13));
  }

  TEST_CASE("closed-form time matches the hcmm allocation") {
    const auto s = scenario_1();
    const Counts counts{10, 2};
    CHECK(expected_time(counts, s) == doctest::Approx(hcmm_allocate(s.cluster(counts), 100).tau_star));
  }

  TEST_CASE("scenario 2 table entries") {
    const auto s = scenario_2();
    CHECK(hcmm_expected_cost(Counts{10, 6, 0}, s) == doctest::Approx(486.22986136863545).epsilon(1e-13));
    CHECK(expected_time(Counts{10, 6, 0}, s) == doctest::Approx(14.300878275548103).epsilon(1e-13));
  }

  TEST_CASE("cost bounds") {
    const auto b1 = cost_bounds(scenario_1());
    CHECK(b1.c_min == doctest::Approx(629.2386441241165).epsilon(1e-13));
    CHECK(b1.c_max == doctest::Approx(1258.477288248233).epsilon(1e-13));
    const auto b2 = cost_bounds(scenario_2());
    CHECK(b2.c_min == doctest::Approx(314.61932206205825).epsilon(1e-13));
    CHECK(b2.c_max == doctest::Approx(2516.954576496466).epsilon(1e-13));
    const auto single = cost_bounds(BudgetScenario({{0.5, 2, 4}}, {1, 2}, 100, 1000));
    CHECK(single.c_min == single.c_max);
  }

  TEST_CASE("x_xi rounded to 3.146 gives the tabulated figures") {
    const double x = 3.146;
    CHECK(100 * x * 2 == doctest::Approx(629.2));
    CHECK(100 * x * 4 == doctest::Approx(1258.4));
    CHECK(100 * x * 8 == doctest::Approx(2516.8));
    CHECK(100 * x * (10 * 4 + 2 * 16) / 28.0 == doctest::Approx(808.97).epsilon(1e-4));
  }

  TEST_CASE("scenario 1 search") {
    const auto res = heuristic_search(scenario_1());
    REQUIRE(res.feasible);
    CHECK(res.counts == Counts{10, 2});
    CHECK(res.cost == doctest::Approx(809.021113873864).epsilon(1e-13));
    CHECK(res.time == doctest::Approx(11.236404359359224).epsilon(1e-13));
    CHECK(res.iterations == 9);
    REQUIRE(res.path.size() == 9);
    CHECK(res.path.front().counts == Counts{10, 10});
    CHECK(res.path.back().counts == Counts{10, 2});
  }

  TEST_CASE("scenario 2 search with a strict budget") {
    const auto res = heuristic_search(scenario_2());
    REQUIRE(res.feasible);
    CHECK(res.counts == Counts{10, 5, 0});
    CHECK(res.cost <= 475.0);
    CHECK(res.iterations == 16);
    REQUIRE(res.path.size() >= 15);
    CHECK(res.path[14].counts == Counts{10, 6, 0});
    CHECK(res.path[14].cost == doctest::Approx(486.22986136863545));
  }

  TEST_CASE("budget below the lower bound is infeasible") {
    const auto res = heuristic_search(scenario_1(600));
    CHECK_FALSE(res.feasible);
    CHECK(res.counts.empty());
  }

  TEST_CASE("classes sort by mu with stable ties") {
    const BudgetScenario s({{0.25, 4, 3}, {0.5, 2, 5}, {0.5, 2, 7}}, {1, 2}, 100, 1000);
    CHECK(s.classes()[0].available == 5);
    CHECK(s.classes()[1].available == 7);
    CHECK(s.classes()[2].available == 3);
    CHECK(s.input_order() == std::vector<std::size_t>{2, 0, 1});
  }

  TEST_CASE("unequal products are rejected") {
    CHECK_THROWS_AS(BudgetScenario({{1, 1, 2}, {1, 2, 2}}, {1, 2}, 100, 100), std::invalid_argument);
  }

  TEST_CASE("removing a fastest machine never raises cost, a slowest never lowers it") {
    Rng rng(2024);
    for (int rep = 0; rep < 500; ++rep) {
      const std::size_t k = 2 + rng.below(3);
      const double xi = 0.1 + 3.0 * rng.uniform();
      std::vector<MachineClass> classes;
      for (std::size_t i = 0; i < k; ++i) {
        const double mu = 0.25 + 8.0 * rng.uniform();
        classes.push_back({xi / mu, mu, static_cast<std::int64_t>(1 + rng.below(10))});
      }
      const CostModel cost{0.5 + rng.uniform(), 1.0 + 2.0 * rng.uniform()};
      const BudgetScenario s(classes, cost, 100, 1e9);
      Counts counts;
      for (const auto& c : s.classes()) counts.push_back(1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c.available))));
      const double base = hcmm_expected_cost(counts, s);
      Counts fewer_fast = counts;
      --fewer_fast.back();
      Counts fewer_slow = counts;
      --fewer_slow.front();
      CAPTURE(rep);
      CHECK(hcmm_expected_cost(fewer_fast, s) <= base * (1 + 1e-12));
      CHECK(hcmm_expected_cost(fewer_slow, s) >= base * (1 - 1e-12));
    }
  }

  TEST_CASE("builtin budget scenarios") {
    const auto s1 = budget_scenario(builtin("budget-1"));
    CHECK(s1.budget() == 860.0);
    CHECK(s1.r() == 100);
    const auto s2 = budget_scenario(builtin("budget-2"));
    CHECK(s2.classes().size() == 3);
    CHECK(s2.budget() == 475.0);
  }
}
