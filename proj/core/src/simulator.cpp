#include "hcmm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hcmm/parallel.hpp"

namespace hcmm {

void StragglerModel::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("straggler probability must be in [0, 1]");
  if (!(slowdown >= 1.0) || !std::isfinite(slowdown)) {
    throw std::invalid_argument("straggler slowdown must be >= 1");
  }
}

CompletionPoint completion_point(std::span<const std::int64_t> loads,
                                 std::span<const double> finish_times, std::int64_t r_needed) {
  if (loads.size() != finish_times.size()) {
    throw std::invalid_argument("completion_time: loads and finish times differ in length");
  }
  if (r_needed < 1) throw std::invalid_argument("completion_time: r_needed must be >= 1");
  std::int64_t total = 0;
  std::vector<std::size_t> order;
  order.reserve(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (loads[i] < 0) throw std::invalid_argument("completion_time: negative load");
    if (loads[i] == 0) continue;
    total += loads[i];
    order.push_back(i);
  }
  if (r_needed > total) {
    throw UndecodableError("completion_time: r_needed = " + std::to_string(r_needed) +
                           " exceeds total load " + std::to_string(total));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return finish_times[x] < finish_times[y] || (finish_times[x] == finish_times[y] && x < y);
  });
  std::int64_t collected = 0;
  for (std::size_t i : order) {
    collected += loads[i];
    if (collected >= r_needed) return {finish_times[i], collected};
  }
  return {finish_times[order.back()], collected};  // unreachable: r_needed <= total
}

double completion_time(std::span<const std::int64_t> loads, std::span<const double> finish_times,
                       std::int64_t r_needed) {
  return completion_point(loads, finish_times, r_needed).time;
}

namespace {

void check_loads(const ClusterSpec& cluster, std::size_t count) {
  if (cluster.size() != count) {
    throw std::invalid_argument("allocation has " + std::to_string(count) +
                                " loads for a cluster of " + std::to_string(cluster.size()));
  }
}

// Fills finish/stragglers for one trial; shared by simulate_once and the
// estimator's hot loop.
void draw_finish_times(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                       const StragglerModel& straggler, Rng& rng, std::vector<double>& finish,
                       std::vector<bool>* stragglers) {
  finish.resize(loads.size());
  if (stragglers) stragglers->assign(loads.size(), false);
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const double u = rng.uniform();
    const bool slow = rng.uniform() < straggler.p;
    if (loads[i] <= 0) {
      finish[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double t = runtime_from_uniform(cluster.workers[i].model, loads[i], u);
    finish[i] = slow ? t * straggler.slowdown : t;
    if (stragglers) (*stragglers)[i] = slow;
  }
}

}  // namespace

TrialOutcome simulate_once(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                           std::int64_t r_needed, const StragglerModel& straggler, Rng& rng) {
  check_loads(cluster, loads.size());
  straggler.validate();
  TrialOutcome out;
  draw_finish_times(cluster, loads, straggler, rng, out.finish_times, &out.stragglers);
  const auto point = completion_point(loads, out.finish_times, r_needed);
  out.completion = point.time;
  out.rows_collected = point.rows;
  return out;
}

Estimate estimate_expected_time(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                                std::int64_t r_needed, const StragglerModel& straggler,
                                std::int64_t trials, const Rng& root, unsigned threads) {
  check_loads(cluster, loads.size());
  straggler.validate();
  if (trials < 2) throw std::invalid_argument("estimate_expected_time: trials must be >= 2");
  const std::int64_t total = std::accumulate(loads.begin(), loads.end(), std::int64_t{0});
  if (r_needed > total) {
    throw UndecodableError("estimate_expected_time: r_needed exceeds total load");
  }

  std::vector<double> samples(static_cast<std::size_t>(trials));
  parallel_for(trials, threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> finish;
    for (std::int64_t t = begin; t < end; ++t) {
      Rng rng = root.substream(static_cast<std::uint64_t>(t));
      draw_finish_times(cluster, loads, straggler, rng, finish, nullptr);
      samples[static_cast<std::size_t>(t)] = completion_time(loads, finish, r_needed);
    }
  });

  const double n = static_cast<double>(trials);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n), trials};
}

double expected_aggregate_return(const ClusterSpec& cluster, std::span<const double> loads,
                                 double t) {
  check_loads(cluster, loads.size());
  double total = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const double l = loads[i];
    if (!(l > 0.0)) continue;
    const auto& m = cluster.workers[i].model;
    const double excess = t - m.a * l;
    if (!(excess > 0.0)) continue;
    const double z = m.mu / l * excess;
    const double alpha = m.shape();
    total += l * -std::expm1(-(alpha == 1.0 ? z : std::pow(z, alpha)));
  }
  return total;
}

double shortfall_probability(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                             double t, std::int64_t r, std::int64_t trials, const Rng& root) {
  check_loads(cluster, loads.size());
  if (trials < 1) throw std::invalid_argument("shortfall_probability: trials must be >= 1");
  std::int64_t short_count = 0;
  std::vector<double> finish;
  const StragglerModel none{};
  for (std::int64_t k = 0; k < trials; ++k) {
    Rng rng = root.substream(static_cast<std::uint64_t>(k));
    draw_finish_times(cluster, loads, none, rng, finish, nullptr);
    std::int64_t rows = 0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
      if (loads[i] > 0 && finish[i] <= t) rows += loads[i];
    }
    if (rows < r) ++short_count;
  }
  return static_cast<double>(short_count) / static_cast<double>(trials);
}

const SchemeRow& SchemeComparison::row(Scheme scheme) const {
  for (const auto& r : rows) {
    if (r.scheme == scheme) return r;
  }
  throw std::out_of_range("comparison has no row for " + to_string(scheme));
}

double SchemeComparison::hcmm_speedup_over(Scheme scheme) const {
  return 1.0 - row(Scheme::HCMM).mean_s / row(scheme).mean_s;
}

SchemeComparison compare_schemes(const ClusterSpec& cluster, std::int64_t r,
                                 const CompareOptions& options) {
  cluster.validate();
  options.straggler.validate();
  if (r < 1) throw std::invalid_argument("compare_schemes: r must be >= 1");
  if (options.trials < 2) throw std::invalid_argument("compare_schemes: trials must be >= 2");

  SchemeComparison out;
  out.r = r;
  out.r_coded = r;
  if (options.lt_epsilon) {
    if (!(*options.lt_epsilon >= 0.0)) throw std::invalid_argument("lt epsilon must be >= 0");
    out.r_coded = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(r) * (1.0 + *options.lt_epsilon) - 1e-9));
  }

  UniformCodedOptions uc;
  uc.grid = options.redundancy_grid;
  uc.trials = options.uniform_coded_trials;
  uc.seed = splitmix64(options.seed + 1);
  uc.threads = options.threads;

  std::vector<Allocation> allocations;
  allocations.push_back(hcmm_allocate(cluster, out.r_coded));
  allocations.push_back(uniform_uncoded(cluster, r));
  allocations.push_back(load_balanced_uncoded(cluster, r));
  allocations.push_back(uniform_coded(cluster, out.r_coded, uc, options.straggler));

  const Rng root(options.seed);
  for (auto& alloc : allocations) {
    const auto est = estimate_expected_time(cluster, alloc.loads, alloc.rows_needed(),
                                            options.straggler, options.trials, root,
                                            options.threads);
    SchemeRow row;
    row.scheme = alloc.scheme;
    row.mean_s = est.mean;
    row.stderr_s = est.std_error;
    row.redundancy = static_cast<double>(alloc.total_load()) / static_cast<double>(r);
    row.trials = est.trials;
    row.allocation = std::move(alloc);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string to_csv(const SchemeComparison& comparison) {
  std::ostringstream os;
  os.precision(10);
  os << "scheme,mean_s,stderr_s,redundancy,trials,decode_s\n";
  for (const auto& row : comparison.rows) {
    os << to_string(row.scheme) << ',' << row.mean_s << ',' << row.stderr_s << ','
       << row.redundancy << ',' << row.trials << ',';
    if (row.decode_s) os << *row.decode_s;
    os << '\n';
  }
  return os.str();
}

}  // namespace hcmm
