#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcmm/rng.hpp"

namespace hcmm {

enum class RuntimeFamily { ShiftedExponential, ShiftedWeibull };

// Run-time law of one worker loaded with `load` rows:
//   Pr[T <= t] = 1 - exp(-((mu/load) (t - a load))^alpha),  t >= a load,
// with alpha fixed to 1 for the shifted exponential family.
struct RuntimeModel {
  RuntimeFamily family = RuntimeFamily::ShiftedExponential;
  double a = 1.0;      // shift, seconds per row
  double mu = 1.0;     // straggling parameter, rows per second
  double alpha = 1.0;  // shape; only meaningful for ShiftedWeibull

  static RuntimeModel exponential(double a, double mu);
  static RuntimeModel weibull(double a, double mu, double alpha);

  // Shape actually used by the formulas (1 for exponential).
  double shape() const { return family == RuntimeFamily::ShiftedWeibull ? alpha : 1.0; }

  // Throws std::invalid_argument when a, mu or alpha are out of domain.
  void validate() const;

  friend bool operator==(const RuntimeModel&, const RuntimeModel&) = default;
};

struct WorkerSpec {
  int id = 0;
  RuntimeModel model;

  friend bool operator==(const WorkerSpec&, const WorkerSpec&) = default;
};

struct ClusterSpec {
  std::vector<WorkerSpec> workers;

  std::size_t size() const { return workers.size(); }
  // n >= 1, unique ids, every model valid.
  void validate() const;

  // Workers numbered 0..n-1 from a list of models.
  static ClusterSpec from_models(std::span<const RuntimeModel> models);

  friend bool operator==(const ClusterSpec&, const ClusterSpec&) = default;
};

double cdf_runtime(const RuntimeModel& model, std::int64_t load, double t);

// Inverse-CDF transform of a single uniform draw u in [0, 1).
double runtime_from_uniform(const RuntimeModel& model, std::int64_t load, double u);
double sample_runtime(const RuntimeModel& model, std::int64_t load, Rng& rng);

double mean_runtime(const RuntimeModel& model, std::int64_t load);

// Expected seconds per row, i.e. mean_runtime(model, 1).
double unit_time(const RuntimeModel& model);

std::string to_string(RuntimeFamily family);

}  // namespace hcmm
