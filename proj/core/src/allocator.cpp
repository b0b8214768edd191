#include "hcmm/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hcmm/roots.hpp"
#include "hcmm/simulator.hpp"

namespace hcmm {

namespace {

void require_target(std::int64_t r_target) {
  if (r_target < 1) throw std::invalid_argument("r_target must be >= 1");
}

// ceil() that ignores floating-point noise just above an integer.
std::int64_t ceil_rows(double x) {
  return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

// Stationarity equation in y = mu (lambda - a): y^alpha - log(1 + alpha (xi + y) y^(alpha-1))
// with xi = a mu. Negative below the root, positive above; never overflows.
struct StationarityResidual {
  double xi;
  double alpha;

  explicit StationarityResidual(const RuntimeModel& m) : xi(m.a * m.mu), alpha(m.shape()) {}

  double operator()(double y) const {
    const double y_alpha = alpha == 1.0 ? y : std::pow(y, alpha);
    const double y_alpha_m1 = alpha == 1.0 ? 1.0 : std::pow(y, alpha - 1.0);
    return y_alpha - std::log1p(alpha * (xi + y) * y_alpha_m1);
  }
};

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::HCMM: return "hcmm";
    case Scheme::UniformUncoded: return "uniform-uncoded";
    case Scheme::LoadBalancedUncoded: return "load-balanced-uncoded";
    case Scheme::UniformCoded: return "uniform-coded";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& name) {
  for (Scheme s : {Scheme::HCMM, Scheme::UniformUncoded, Scheme::LoadBalancedUncoded,
                   Scheme::UniformCoded}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool is_coded(Scheme scheme) {
  return scheme == Scheme::HCMM || scheme == Scheme::UniformCoded;
}

std::int64_t Allocation::total_load() const {
  return std::accumulate(loads.begin(), loads.end(), std::int64_t{0});
}

std::int64_t Allocation::rows_needed() const {
  return is_coded(scheme) ? r_target : total_load();
}

double lambda_residual(const RuntimeModel& model, double lambda) {
  // |lhs - rhs| / lhs = |1 - exp(log rhs - log lhs)|
  return std::abs(std::expm1(-StationarityResidual(model)(model.mu * (lambda - model.a))));
}

WorkerRate solve_lambda(const RuntimeModel& model) {
  model.validate();
  const StationarityResidual g(model);
  const double lo = 1e-12;
  if (!(g(lo) < 0.0)) {
    throw RootBracketError("solve_lambda: residual not negative next to the shift");
  }

  double hi = 1.0;
  int expansions = 0;
  while (!(g(hi) > 0.0)) {
    hi *= 2.0;
    if (++expansions > 200) {
      throw RootBracketError("solve_lambda: no sign change above a = " + std::to_string(model.a));
    }
  }

  // Geometric scan so a root close to the shift is not skipped; the first sign
  // change is the smallest root.
  constexpr int kScan = 512;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  double prev = lo;
  double root_lo = lo, root_hi = hi;
  for (int i = 1; i <= kScan; ++i) {
    const double y = i == kScan ? hi : std::exp(log_lo + (log_hi - log_lo) * i / kScan);
    const double v = g(y);
    if (v > 0.0) {
      root_lo = prev;
      root_hi = y;
      break;
    }
    if (v == 0.0) {
      root_lo = root_hi = y;
      break;
    }
    prev = y;
  }

  const double y = root_lo == root_hi ? root_lo : bisect(g, root_lo, root_hi, 0.0);
  const double lambda = model.a + y / model.mu;
  if (lambda_residual(model, lambda) > 1e-9) {
    throw RootBracketError("solve_lambda: residual did not converge");
  }

  const double alpha = model.shape();
  const double w = alpha * model.mu * (alpha == 1.0 ? 1.0 : std::pow(y, alpha - 1.0));
  return {lambda, w / (1.0 + w * lambda)};
}

double cluster_rate(const ClusterSpec& cluster) {
  cluster.validate();
  double s = 0.0;
  for (const auto& w : cluster.workers) s += solve_lambda(w.model).rate;
  return s;
}

Allocation hcmm_allocate(const ClusterSpec& cluster, std::int64_t r_target) {
  require_target(r_target);
  cluster.validate();
  std::vector<WorkerRate> rates;
  rates.reserve(cluster.size());
  double s = 0.0;
  for (const auto& w : cluster.workers) {
    rates.push_back(solve_lambda(w.model));
    s += rates.back().rate;
  }

  Allocation out;
  out.scheme = Scheme::HCMM;
  out.r_target = r_target;
  out.tau_star = static_cast<double>(r_target) / s;
  for (const auto& wr : rates) {
    const double exact = out.tau_star / wr.lambda;
    out.exact_loads.push_back(exact);
    out.loads.push_back(ceil_rows(exact));
  }
  return out;
}

Allocation uniform_uncoded(const ClusterSpec& cluster, std::int64_t r_target) {
  require_target(r_target);
  cluster.validate();
  const auto n = static_cast<std::int64_t>(cluster.size());
  Allocation out;
  out.scheme = Scheme::UniformUncoded;
  out.r_target = r_target;
  out.exact_loads.assign(cluster.size(), static_cast<double>(r_target) / static_cast<double>(n));
  out.loads.assign(cluster.size(), (r_target + n - 1) / n);
  return out;
}

Allocation load_balanced_uncoded(const ClusterSpec& cluster, std::int64_t r_target) {
  require_target(r_target);
  cluster.validate();
  std::vector<double> weight;
  weight.reserve(cluster.size());
  for (const auto& w : cluster.workers) weight.push_back(1.0 / unit_time(w.model));
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);

  Allocation out;
  out.scheme = Scheme::LoadBalancedUncoded;
  out.r_target = r_target;
  for (double wt : weight) {
    const double exact = static_cast<double>(r_target) * wt / total;
    out.exact_loads.push_back(exact);
    out.loads.push_back(ceil_rows(exact));
  }
  return out;
}

std::vector<double> default_redundancy_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(1.0 + 0.05 * i);
  return grid;
}

Allocation uniform_coded(const ClusterSpec& cluster, std::int64_t r_target,
                         const UniformCodedOptions& options) {
  return uniform_coded(cluster, r_target, options, StragglerModel{});
}

Allocation uniform_coded(const ClusterSpec& cluster, std::int64_t r_target,
                         const UniformCodedOptions& options, const StragglerModel& straggler) {
  require_target(r_target);
  cluster.validate();
  if (options.trials < 1) throw std::invalid_argument("uniform_coded: trials must be >= 1");
  const auto grid = options.grid.empty() ? default_redundancy_grid() : options.grid;
  const double n = static_cast<double>(cluster.size());
  const Rng root(options.seed);

  double best_mean = 0.0;
  double best_r = 0.0;
  bool have_best = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double redundancy_factor = grid[g];
    if (!(redundancy_factor >= 1.0)) {
      throw std::invalid_argument("uniform_coded: redundancy grid values must be >= 1");
    }
    const std::int64_t load = ceil_rows(redundancy_factor * static_cast<double>(r_target) / n);
    const std::vector<std::int64_t> loads(cluster.size(), load);
    const auto est = estimate_expected_time(cluster, loads, r_target, straggler, options.trials,
                                            root, options.threads);
    if (!have_best || est.mean < best_mean) {
      have_best = true;
      best_mean = est.mean;
      best_r = redundancy_factor;
    }
  }

  Allocation out;
  out.scheme = Scheme::UniformCoded;
  out.r_target = r_target;
  const double exact = best_r * static_cast<double>(r_target) / n;
  out.exact_loads.assign(cluster.size(), exact);
  out.loads.assign(cluster.size(), ceil_rows(exact));
  return out;
}

Allocation allocate(Scheme scheme, const ClusterSpec& cluster, std::int64_t r_target,
                    const UniformCodedOptions& uc_options) {
  switch (scheme) {
    case Scheme::HCMM: return hcmm_allocate(cluster, r_target);
    case Scheme::UniformUncoded: return uniform_uncoded(cluster, r_target);
    case Scheme::LoadBalancedUncoded: return load_balanced_uncoded(cluster, r_target);
    case Scheme::UniformCoded: return uniform_coded(cluster, r_target, uc_options);
  }
  throw std::invalid_argument("unknown scheme");
}

double redundancy(const Allocation& allocation) {
  require_target(allocation.r_target);
  return static_cast<double>(allocation.total_load()) / static_cast<double>(allocation.r_target);
}

}  // namespace hcmm
