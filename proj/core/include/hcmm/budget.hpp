#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcmm/models.hpp"

namespace hcmm {

struct MachineClass {
  double a = 0.0;
  double mu = 0.0;
  std::int64_t available = 0;

  friend bool operator==(const MachineClass&, const MachineClass&) = default;
};

// Cost per unit time of one machine: kappa * mu^gamma.
struct CostModel {
  double kappa = 1.0;
  double gamma = 1.0;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

// Machine classes share a_k mu_k = xi. Classes are kept sorted by mu
// ascending (stable), so index K-1 is the fastest class.
class BudgetScenario {
 public:
  BudgetScenario(std::vector<MachineClass> classes, CostModel cost, std::int64_t r, double budget);

  const std::vector<MachineClass>& classes() const { return classes_; }
  const CostModel& cost() const { return cost_; }
  std::int64_t r() const { return r_; }
  double budget() const { return budget_; }
  double xi() const { return xi_; }
  double x_xi() const { return x_xi_; }

  // Position of input class i after sorting.
  const std::vector<std::size_t>& input_order() const { return order_; }

  // Cluster with counts[k] shifted-exponential workers of class k.
  ClusterSpec cluster(std::span<const std::int64_t> counts) const;

 private:
  std::vector<MachineClass> classes_;
  std::vector<std::size_t> order_;
  CostModel cost_;
  std::int64_t r_;
  double budget_;
  double xi_;
  double x_xi_;
};

// Root x > 1 of exp(x - xi - 1) = x.
double solve_x_xi(double xi);

double machine_cost_rate(double mu, const CostModel& cost);

// kappa r x_xi (sum n_k mu_k^gamma) / (sum n_k mu_k)
double hcmm_expected_cost(std::span<const std::int64_t> counts, const BudgetScenario& scenario);

// r x_xi / (sum n_k mu_k)
double expected_time(std::span<const std::int64_t> counts, const BudgetScenario& scenario);

struct CostBounds {
  double c_min = 0.0;
  double c_max = 0.0;
};

CostBounds cost_bounds(const BudgetScenario& scenario);

struct SearchStep {
  std::vector<std::int64_t> counts;
  double cost = 0.0;
};

struct SearchResult {
  bool feasible = false;
  std::vector<std::int64_t> counts;  // empty when infeasible
  double cost = 0.0;
  double time = 0.0;
  int iterations = 0;  // cost evaluations, the initial full-count one included
  std::vector<SearchStep> path;
};

// Starts from every available machine and removes one machine of the fastest
// non-empty class until the closed-form cost is <= budget.
SearchResult heuristic_search(const BudgetScenario& scenario);

}  // namespace hcmm
