#include "hcmm/models.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace hcmm {

namespace {

void require_load(std::int64_t load) {
  if (load < 1) {
    throw std::invalid_argument("run-time is undefined for a worker with load " +
                                std::to_string(load));
  }
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

RuntimeModel RuntimeModel::exponential(double a, double mu) {
  RuntimeModel m{RuntimeFamily::ShiftedExponential, a, mu, 1.0};
  m.validate();
  return m;
}

RuntimeModel RuntimeModel::weibull(double a, double mu, double alpha) {
  RuntimeModel m{RuntimeFamily::ShiftedWeibull, a, mu, alpha};
  m.validate();
  return m;
}

void RuntimeModel::validate() const {
  if (!positive_finite(a)) throw std::invalid_argument("runtime model: a must be > 0");
  if (!positive_finite(mu)) throw std::invalid_argument("runtime model: mu must be > 0");
  if (family == RuntimeFamily::ShiftedWeibull && !positive_finite(alpha)) {
    throw std::invalid_argument("runtime model: alpha must be > 0");
  }
}

void ClusterSpec::validate() const {
  if (workers.empty()) throw std::invalid_argument("cluster must contain at least one worker");
  std::set<int> ids;
  for (const auto& w : workers) {
    w.model.validate();
    if (!ids.insert(w.id).second) {
      throw std::invalid_argument("duplicate worker id " + std::to_string(w.id));
    }
  }
}

ClusterSpec ClusterSpec::from_models(std::span<const RuntimeModel> models) {
  ClusterSpec c;
  c.workers.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    c.workers.push_back({static_cast<int>(i), models[i]});
  }
  return c;
}

double cdf_runtime(const RuntimeModel& model, std::int64_t load, double t) {
  require_load(load);
  const double l = static_cast<double>(load);
  const double excess = t - model.a * l;
  if (!(excess > 0.0)) return 0.0;
  const double z = model.mu / l * excess;
  const double alpha = model.shape();
  return -std::expm1(-(alpha == 1.0 ? z : std::pow(z, alpha)));
}

double runtime_from_uniform(const RuntimeModel& model, std::int64_t load, double u) {
  require_load(load);
  const double l = static_cast<double>(load);
  const double e = -std::log1p(-u);
  const double alpha = model.shape();
  return model.a * l + l / model.mu * (alpha == 1.0 ? e : std::pow(e, 1.0 / alpha));
}

double sample_runtime(const RuntimeModel& model, std::int64_t load, Rng& rng) {
  return runtime_from_uniform(model, load, rng.uniform());
}

double mean_runtime(const RuntimeModel& model, std::int64_t load) {
  require_load(load);
  const double l = static_cast<double>(load);
  return model.a * l + l / model.mu * std::tgamma(1.0 + 1.0 / model.shape());
}

double unit_time(const RuntimeModel& model) { return mean_runtime(model, 1); }

std::string to_string(RuntimeFamily family) {
  return family == RuntimeFamily::ShiftedWeibull ? "weibull" : "exponential";
}

}  // namespace hcmm
