#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hcmm/allocator.hpp"
#include "hcmm/budget.hpp"
#include "hcmm/emulator.hpp"
#include "hcmm/models.hpp"
#include "hcmm/simulator.hpp"

namespace hcmm {

// count identical workers; alpha only for Weibull scenarios.
struct WorkerGroup {
  std::int64_t count = 0;
  double a = 0.0;
  double mu = 0.0;
  std::optional<double> alpha;

  friend bool operator==(const WorkerGroup&, const WorkerGroup&) = default;
};

// n workers whose parameters are drawn independently and uniformly from the
// sets, coordinate by coordinate.
struct RandomCluster {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> a_set;
  std::vector<double> mu_set;
  std::vector<double> alpha_set;  // Weibull only

  friend bool operator==(const RandomCluster&, const RandomCluster&) = default;
};

struct LtParams {
  double c = 0.03;
  double delta = 0.1;
  double epsilon = 0.13;

  friend bool operator==(const LtParams&, const LtParams&) = default;
};

struct BudgetConfig {
  std::vector<MachineClass> classes;
  CostModel cost;
  double budget = 0.0;

  friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

struct ScenarioConfig {
  std::string name;
  RuntimeFamily family = RuntimeFamily::ShiftedExponential;
  std::vector<WorkerGroup> groups;    // either groups,
  std::optional<RandomCluster> random;  // a random cluster,
  std::int64_t r = 0;                  // or (with neither) the budget classes at full count
  std::vector<Scheme> schemes{Scheme::HCMM, Scheme::UniformUncoded, Scheme::LoadBalancedUncoded,
                              Scheme::UniformCoded};
  CodingMode coding = CodingMode::Rlc;
  LtParams lt;  // used when coding is LT
  StragglerModel straggler;
  std::int64_t trials = 5000;
  std::string output;
  std::optional<BudgetConfig> budget;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Carries every field error found, each prefixed by its path, e.g.
// "cluster.groups[1].alpha: not allowed for shifted-exponential".
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::vector<std::string> builtin_names();
ScenarioConfig builtin(std::string_view name);

// JSON text. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
// Builtin name or path to a JSON file.
ScenarioConfig resolve_scenario(const std::string& ref);

std::string serialize(const ScenarioConfig& config);

// Field errors; empty when valid.
std::vector<std::string> validation_errors(const ScenarioConfig& config);
void validate(const ScenarioConfig& config);

ClusterSpec resolve_cluster(const ScenarioConfig& config);
BudgetScenario budget_scenario(const ScenarioConfig& config);

// LT code for the scenario's r, or nullopt under RLC.
std::optional<LtCodeSpec> lt_spec(const ScenarioConfig& config);

}  // namespace hcmm
