#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcmm/coding.hpp"
#include "hcmm/matrix.hpp"
#include "hcmm/models.hpp"
#include "hcmm/simulator.hpp"

namespace hcmm {

enum class CodingMode { Uncoded, Rlc, Lt };
enum class ExecutionMode { Virtual, Concurrent };

std::string to_string(CodingMode mode);

// One coded matrix-vector job.
//
// Master/worker protocol (ExecutionMode::Concurrent): the master hands every
// worker its coded block, then sends
//   Broadcast(x)                        master -> each worker
// and each worker answers with
//   Announce(worker, finish_time)       its virtual finish time, sent before computing
//   Result(worker, symbol ids, values)  the coded inner products
// The master commits results in (finish_time, worker) order, so the decode
// point does not depend on thread scheduling. Once decodable it sends
//   Done                                cancels outstanding work and pauses
// Virtual mode runs the same commit loop in one context.
//
// Randomness: Rng(seed).substream(0) encodes, substream(1) draws the straggler
// mask, substream(2).substream(i) samples worker i's run time.
struct JobSpec {
  DenseMatrix A;
  std::vector<double> x;
  ClusterSpec cluster;
  std::vector<std::int64_t> loads;
  CodingMode coding = CodingMode::Rlc;
  std::optional<LtCodeSpec> lt;  // required for CodingMode::Lt
  StragglerModel straggler;
  std::uint64_t seed = 0;
  ExecutionMode mode = ExecutionMode::Virtual;
  // Concurrent mode only: stragglers really pause (slowdown - 1) x their
  // measured compute time before reporting.
  bool real_delays = false;

  // Test hooks.
  std::optional<std::vector<DenseMatrix>> rlc_coding;  // explicit S_i per worker
  double corrupt_result = 0.0;                        // added to y[0] after decoding

  void validate() const;
};

struct JobMetrics {
  bool decoded = false;
  double wait_time = 0.0;             // virtual seconds until decodable
  std::int64_t rows_received = 0;     // rows in the committed results
  std::int64_t symbols_used = 0;      // rows consumed by the decoder
  std::int64_t decode_threshold = 0;  // r for RLC/uncoded; 0 for LT (peeling decides)
  double max_abs_error = 0.0;
  double reference_norm = 0.0;        // ||Ax||_inf
  std::vector<double> worker_times;   // virtual total time per worker; +inf when unloaded
  std::vector<bool> stragglers;

  // Wall-clock fields; excluded from cross-mode comparisons.
  double wall_wait_s = 0.0;
  double decode_s = 0.0;
  std::vector<double> worker_compute_s;

  double relative_error() const {
    return reference_norm > 0.0 ? max_abs_error / reference_norm : max_abs_error;
  }
  // Decoded and within tolerance * ||Ax||_inf.
  bool verified(double tolerance = 1e-6) const;
  // Equality over every field except the wall-clock ones.
  bool same_outcome(const JobMetrics& other) const;
};

struct JobResult {
  JobMetrics metrics;
  std::vector<double> y;          // decoded A x (empty if undecodable)
  std::vector<double> reference;  // directly computed A x
};

JobResult run_job(const JobSpec& spec);

std::vector<bool> inject_stragglers(std::size_t worker_count, const StragglerModel& straggler,
                                    Rng& rng);

// Infinity norm of result - reference.
double verify(std::span<const double> result, std::span<const double> reference);

std::string job_metrics_csv_header();
std::string to_csv_row(const JobMetrics& metrics);

// Matrix / vector with i.i.d. N(0, 1) entries.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);
std::vector<double> gaussian_vector(std::size_t n, Rng& rng);

// Uniform integers in [-bound, bound]. LT peeling over the reals amplifies
// rounding error along long substitution chains; with integer data every
// product and peeling step is exact while sums stay below 2^53.
DenseMatrix integer_matrix(std::size_t rows, std::size_t cols, Rng& rng, int bound = 100);
std::vector<double> integer_vector(std::size_t n, Rng& rng, int bound = 100);

}  // namespace hcmm
