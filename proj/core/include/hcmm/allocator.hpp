#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcmm/models.hpp"
#include "hcmm/rng.hpp"

namespace hcmm {

struct StragglerModel;

// Per-worker constant of the HCMM allocation: the optimal load at time t is
// t / lambda, and `rate` is that worker's contribution to the cluster rate s.
struct WorkerRate {
  double lambda = 0.0;  // seconds per row, > a
  double rate = 0.0;    // rows per second
};

enum class Scheme { HCMM, UniformUncoded, LoadBalancedUncoded, UniformCoded };

std::string to_string(Scheme scheme);
std::optional<Scheme> scheme_from_string(const std::string& name);
bool is_coded(Scheme scheme);

struct Allocation {
  Scheme scheme = Scheme::HCMM;
  std::vector<std::int64_t> loads;   // rows per worker after ceil rounding
  std::vector<double> exact_loads;   // pre-rounding loads
  double tau_star = 0.0;             // nominal completion time; 0 for uncoded schemes
  std::int64_t r_target = 0;         // rows the master needs to decode

  std::int64_t total_load() const;
  // Rows the master must collect: r_target for coded schemes, every assigned
  // row for uncoded ones.
  std::int64_t rows_needed() const;
};

// Solves the stationarity equation of the expected-return maximization:
//   exponential: exp(mu lambda) = exp(a mu) (mu lambda + 1)
//   Weibull:     exp(mu^alpha (lambda - a)^alpha) = 1 + alpha mu^alpha lambda (lambda - a)^(alpha - 1)
// Returns the smallest root above a. Throws RootBracketError if no sign change
// is found.
WorkerRate solve_lambda(const RuntimeModel& model);

// Relative residual |lhs - rhs| / lhs of the equation above.
double lambda_residual(const RuntimeModel& model, double lambda);

// s = sum_i rate_i.
double cluster_rate(const ClusterSpec& cluster);

Allocation hcmm_allocate(const ClusterSpec& cluster, std::int64_t r_target);
Allocation uniform_uncoded(const ClusterSpec& cluster, std::int64_t r_target);
Allocation load_balanced_uncoded(const ClusterSpec& cluster, std::int64_t r_target);

struct UniformCodedOptions {
  std::vector<double> grid;          // redundancy candidates; empty means 1.0:0.05:4.0
  std::int64_t trials = 1000;        // Monte Carlo trials per grid point
  std::uint64_t seed = 0;
  unsigned threads = 0;              // 0 = hardware concurrency
};

std::vector<double> default_redundancy_grid();

// Equal coded loads ceil(R r / n) with R picked from the grid by Monte Carlo
// mean completion time under the given straggler model. Every grid point is
// evaluated on the same trial substreams of `seed`.
Allocation uniform_coded(const ClusterSpec& cluster, std::int64_t r_target,
                         const UniformCodedOptions& options);
Allocation uniform_coded(const ClusterSpec& cluster, std::int64_t r_target,
                         const UniformCodedOptions& options, const StragglerModel& straggler);

Allocation allocate(Scheme scheme, const ClusterSpec& cluster, std::int64_t r_target,
                    const UniformCodedOptions& uc_options = {});

// sum(loads) / r_target.
double redundancy(const Allocation& allocation);

}  // namespace hcmm
