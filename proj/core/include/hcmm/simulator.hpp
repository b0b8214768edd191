#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcmm/allocator.hpp"
#include "hcmm/models.hpp"
#include "hcmm/rng.hpp"

namespace hcmm {

// A straggler's total time is `slowdown` times its sampled compute time.
struct StragglerModel {
  double p = 0.0;
  double slowdown = 4.0;

  void validate() const;
  friend bool operator==(const StragglerModel&, const StragglerModel&) = default;
};

class UndecodableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CompletionPoint {
  double time = 0.0;
  std::int64_t rows = 0;  // rows held by the master at `time`
};

// Earliest finish time at which the cumulative load of finished workers
// reaches r_needed. Zero-load workers are ignored. Throws UndecodableError if
// the loads cannot reach r_needed.
CompletionPoint completion_point(std::span<const std::int64_t> loads,
                                 std::span<const double> finish_times, std::int64_t r_needed);
double completion_time(std::span<const std::int64_t> loads, std::span<const double> finish_times,
                       std::int64_t r_needed);

struct TrialOutcome {
  double completion = 0.0;
  std::vector<double> finish_times;  // +inf for zero-load workers
  std::vector<bool> stragglers;
  std::int64_t rows_collected = 0;
};

// Each worker consumes exactly two uniforms from `rng`, in worker order: the
// run-time draw and the straggler draw. Allocations of the same cluster
// therefore see common random numbers.
TrialOutcome simulate_once(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                           std::int64_t r_needed, const StragglerModel& straggler, Rng& rng);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// Trial t draws from root.substream(t), so any thread count gives the same bits.
Estimate estimate_expected_time(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                                std::int64_t r_needed, const StragglerModel& straggler,
                                std::int64_t trials, const Rng& root, unsigned threads = 1);

// sum_i load_i * Pr[T_i <= t]; zero loads contribute nothing.
double expected_aggregate_return(const ClusterSpec& cluster, std::span<const double> loads,
                                 double t);

// Fraction of trials in which fewer than r rows have arrived by time t.
double shortfall_probability(const ClusterSpec& cluster, std::span<const std::int64_t> loads,
                             double t, std::int64_t r, std::int64_t trials, const Rng& root);

struct CompareOptions {
  std::optional<double> lt_epsilon;  // set: coded schemes target ceil(r (1 + eps))
  StragglerModel straggler;
  std::int64_t trials = 5000;
  std::uint64_t seed = 0;
  std::int64_t uniform_coded_trials = 1000;
  std::vector<double> redundancy_grid;  // empty: default grid
  unsigned threads = 1;
};

struct SchemeRow {
  Scheme scheme = Scheme::HCMM;
  double mean_s = 0.0;
  double stderr_s = 0.0;
  double redundancy = 0.0;  // total load / r
  std::int64_t trials = 0;
  std::optional<double> decode_s;
  Allocation allocation;
};

struct SchemeComparison {
  std::int64_t r = 0;
  std::int64_t r_coded = 0;
  std::vector<SchemeRow> rows;

  const SchemeRow& row(Scheme scheme) const;
  // 1 - mean(HCMM) / mean(scheme)
  double hcmm_speedup_over(Scheme scheme) const;
};

// All four schemes over common random numbers: every scheme is evaluated with
// trial substreams of Rng(seed); the Uniform Coded optimizer is seeded with
// splitmix64(seed + 1).
SchemeComparison compare_schemes(const ClusterSpec& cluster, std::int64_t r,
                                 const CompareOptions& options);

// Columns: scheme,mean_s,stderr_s,redundancy,trials,decode_s
std::string to_csv(const SchemeComparison& comparison);

}  // namespace hcmm
