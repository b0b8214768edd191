#include "hcmm/budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hcmm/roots.hpp"

namespace hcmm {

double solve_x_xi(double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("solve_x_xi: xi must be > 0");
  // g(x) = (x - xi - 1) - ln x is negative at x = 1 and increasing beyond it.
  const auto g = [xi](double x) { return (x - xi - 1.0) - std::log(x); };
  double hi = xi + 2.0;
  while (!(g(hi) > 0.0)) hi *= 2.0;
  return bisect(g, 1.0 + 1e-15, hi, 0.0);
}

double machine_cost_rate(double mu, const CostModel& cost) {
  if (!(mu > 0.0)) throw std::invalid_argument("machine_cost_rate: mu must be > 0");
  return cost.kappa * std::pow(mu, cost.gamma);
}

BudgetScenario::BudgetScenario(std::vector<MachineClass> classes, CostModel cost, std::int64_t r,
                               double budget)
    : cost_(cost), r_(r), budget_(budget) {
  if (classes.empty()) throw std::invalid_argument("budget scenario needs at least one class");
  if (!(cost.kappa > 0.0)) throw std::invalid_argument("cost model: kappa must be > 0");
  if (!(cost.gamma >= 1.0)) throw std::invalid_argument("cost model: gamma must be >= 1");
  if (r < 1) throw std::invalid_argument("budget scenario: r must be >= 1");
  if (!(budget > 0.0)) throw std::invalid_argument("budget scenario: budget must be > 0");
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& c = classes[k];
    if (!(c.a > 0.0) || !(c.mu > 0.0)) {
      throw std::invalid_argument("machine class " + std::to_string(k) + ": a and mu must be > 0");
    }
    if (c.available < 0) {
      throw std::invalid_argument("machine class " + std::to_string(k) + ": negative count");
    }
  }

  std::vector<std::size_t> idx(classes.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return classes[x].mu < classes[y].mu; });
  order_.resize(classes.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    classes_.push_back(classes[idx[pos]]);
    order_[idx[pos]] = pos;
  }

  xi_ = classes_.front().a * classes_.front().mu;
  for (const auto& c : classes_) {
    if (std::abs(c.a * c.mu - xi_) > 1e-9 * std::max(1.0, xi_)) {
      throw std::invalid_argument("budget scenario: a_k mu_k must be equal across classes (got " +
                                  std::to_string(c.a * c.mu) + " vs " + std::to_string(xi_) +
                                  ")");
    }
  }
  x_xi_ = solve_x_xi(xi_);
}

ClusterSpec BudgetScenario::cluster(std::span<const std::int64_t> counts) const {
  if (counts.size() != classes_.size()) throw std::invalid_argument("counts length mismatch");
  ClusterSpec c;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::int64_t j = 0; j < counts[k]; ++j) {
      c.workers.push_back({static_cast<int>(c.workers.size()),
                           RuntimeModel::exponential(classes_[k].a, classes_[k].mu)});
    }
  }
  return c;
}

namespace {

struct RateSums {
  double cost_weight = 0.0;  // sum n_k mu_k^gamma
  double speed = 0.0;        // sum n_k mu_k
};

RateSums sums(std::span<const std::int64_t> counts, const BudgetScenario& scenario) {
  const auto& classes = scenario.classes();
  if (counts.size() != classes.size()) {
    throw std::invalid_argument("counts has " + std::to_string(counts.size()) + " entries for " +
                                std::to_string(classes.size()) + " classes");
  }
  RateSums s;
  std::int64_t machines = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw std::invalid_argument("negative machine count");
    const double n = static_cast<double>(counts[k]);
    s.cost_weight += n * std::pow(classes[k].mu, scenario.cost().gamma);
    s.speed += n * classes[k].mu;
    machines += counts[k];
  }
  if (machines == 0) throw std::invalid_argument("at least one machine must be used");
  return s;
}

}  // namespace

double hcmm_expected_cost(std::span<const std::int64_t> counts, const BudgetScenario& scenario) {
  const auto s = sums(counts, scenario);
  return scenario.cost().kappa * static_cast<double>(scenario.r()) * scenario.x_xi() *
         s.cost_weight / s.speed;
}

double expected_time(std::span<const std::int64_t> counts, const BudgetScenario& scenario) {
  const auto s = sums(counts, scenario);
  return static_cast<double>(scenario.r()) * scenario.x_xi() / s.speed;
}

CostBounds cost_bounds(const BudgetScenario& scenario) {
  const auto& classes = scenario.classes();
  const double base =
      scenario.cost().kappa * static_cast<double>(scenario.r()) * scenario.x_xi();
  const double g1 = scenario.cost().gamma - 1.0;
  return {base * std::pow(classes.front().mu, g1), base * std::pow(classes.back().mu, g1)};
}

SearchResult heuristic_search(const BudgetScenario& scenario) {
  SearchResult out;
  std::vector<std::int64_t> counts;
  for (const auto& c : scenario.classes()) counts.push_back(c.available);

  auto any = [&] { return std::any_of(counts.begin(), counts.end(), [](auto n) { return n > 0; }); };
  while (any()) {
    const double cost = hcmm_expected_cost(counts, scenario);
    ++out.iterations;
    out.path.push_back({counts, cost});
    if (cost <= scenario.budget()) {
      out.feasible = true;
      out.counts = counts;
      out.cost = cost;
      out.time = expected_time(counts, scenario);
      return out;
    }
    std::size_t j = counts.size();
    while (counts[--j] == 0) {
    }
    --counts[j];
  }
  return out;
}

}  // namespace hcmm
