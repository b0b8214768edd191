#include "hcmm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hcmm {

namespace {

using Json = nlohmann::ordered_json;

// Fixed sample for the random-heterogeneity scenarios.
constexpr std::uint64_t kRandomScenarioSeed = 1;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Walks a JSON object, collecting errors with their field paths instead of
// stopping at the first one.
class Reader {
 public:
  Reader(const Json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) error(path_, "expected an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) error(at(key), "unknown field");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.is_object() && node_.contains(key);
  }

  const Json* child(const std::string& key, bool required) {
    if (!has(key)) {
      if (required) error(at(key), "missing");
      return nullptr;
    }
    return &node_.at(key);
  }

  template <typename T>
  std::optional<T> get(const std::string& key, bool required = true) {
    const Json* v = child(key, required);
    if (!v) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) return mismatch(key, "a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) return mismatch(key, "a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned()) return mismatch(key, "a non-negative integer");
    } else {
      if (!v->is_number_integer()) return mismatch(key, "an integer");
    }
    return v->get<T>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key, bool required = true) {
    const Json* v = child(key, required);
    if (!v) return std::nullopt;
    if (!v->is_array()) return mismatch<std::vector<double>>(key, "an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        error(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  void error(const std::string& path, const std::string& message) {
    errors_.push_back((path.empty() ? "<root>" : path) + ": " + message);
  }

 private:
  template <typename T = std::nullopt_t>
  std::nullopt_t mismatch(const std::string& key, const std::string& what) {
    error(at(key), "expected " + what);
    return std::nullopt;
  }

  const Json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

std::optional<RuntimeFamily> family_from_string(const std::string& s) {
  if (s == "exponential") return RuntimeFamily::ShiftedExponential;
  if (s == "weibull") return RuntimeFamily::ShiftedWeibull;
  return std::nullopt;
}

void parse_cluster(const Json& node, ScenarioConfig& cfg, std::vector<std::string>& errors) {
  Reader rd(node, "cluster", errors);
  const bool has_groups = rd.has("groups");
  const bool has_random = rd.has("random");
  if (has_groups == has_random) {
    rd.error("cluster", "expected exactly one of 'groups' or 'random'");
    return;
  }
  if (has_groups) {
    const Json& groups = node.at("groups");
    if (!groups.is_array()) {
      rd.error("cluster.groups", "expected an array");
      return;
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
      Reader g(groups[i], "cluster.groups[" + std::to_string(i) + "]", errors);
      WorkerGroup wg;
      wg.count = g.get<std::int64_t>("count").value_or(0);
      wg.a = g.get<double>("a").value_or(0.0);
      wg.mu = g.get<double>("mu").value_or(0.0);
      wg.alpha = g.get<double>("alpha", false);
      cfg.groups.push_back(wg);
    }
  } else {
    Reader rn(node.at("random"), "cluster.random", errors);
    RandomCluster rc;
    rc.n = rn.get<std::int64_t>("n").value_or(0);
    rc.seed = rn.get<std::uint64_t>("seed").value_or(0);
    rc.a_set = rn.numbers("a").value_or(std::vector<double>{});
    rc.mu_set = rn.numbers("mu").value_or(std::vector<double>{});
    rc.alpha_set = rn.numbers("alpha", false).value_or(std::vector<double>{});
    cfg.random = rc;
  }
}

void parse_budget(const Json& node, ScenarioConfig& cfg, std::vector<std::string>& errors) {
  Reader rd(node, "budget", errors);
  BudgetConfig b;
  if (const Json* classes = rd.child("classes", true)) {
    if (!classes->is_array()) {
      rd.error("budget.classes", "expected an array");
    } else {
      for (std::size_t i = 0; i < classes->size(); ++i) {
        Reader c((*classes)[i], "budget.classes[" + std::to_string(i) + "]", errors);
        MachineClass mc;
        mc.a = c.get<double>("a").value_or(0.0);
        mc.mu = c.get<double>("mu").value_or(0.0);
        mc.available = c.get<std::int64_t>("available").value_or(0);
        b.classes.push_back(mc);
      }
    }
  }
  b.cost.kappa = rd.get<double>("kappa").value_or(0.0);
  b.cost.gamma = rd.get<double>("gamma").value_or(0.0);
  b.budget = rd.get<double>("budget").value_or(0.0);
  cfg.budget = b;
}

void check_value(std::vector<std::string>& errors, const std::string& path, bool ok,
                 const std::string& message) {
  if (!ok) errors.push_back(path + ": " + message);
}

std::vector<WorkerGroup> two_groups(std::int64_t n1, double a1, double mu1, std::int64_t n2,
                                    double a2, double mu2) {
  return {{n1, a1, mu1, std::nullopt}, {n2, a2, mu2, std::nullopt}};
}

ScenarioConfig simulation(std::string name, RuntimeFamily family) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.family = family;
  c.r = 10000;
  c.trials = 5000;
  c.output = c.name + ".csv";
  return c;
}

ScenarioConfig ec2(std::string name, std::int64_t fast, std::int64_t slow, double row_scale) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.r = 10000;
  c.groups = two_groups(fast, 1.37e-3 * row_scale, 1.0 / (8.25e-6 * row_scale), slow,
                        2.00e-3 * row_scale, 1.0 / (8.72e-6 * row_scale));
  c.coding = CodingMode::Lt;
  c.straggler = {0.5, 4.0};
  c.trials = 1000;
  c.output = c.name + ".csv";
  return c;
}

ScenarioConfig budget_example(std::string name, std::vector<MachineClass> classes, double budget) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.r = 100;
  c.schemes = {Scheme::HCMM};
  c.trials = 5000;
  c.output = c.name + ".csv";
  c.budget = BudgetConfig{std::move(classes), CostModel{1.0, 2.0}, budget};
  return c;
}

const std::map<std::string, std::function<ScenarioConfig()>>& registry() {
  using F = RuntimeFamily;
  static const std::map<std::string, std::function<ScenarioConfig()>> reg{
      {"exp-scenario-1",
       [] {
         auto c = simulation("exp-scenario-1", F::ShiftedExponential);
         c.groups = two_groups(50, 1, 1, 50, 4, 0.5);
         return c;
       }},
      {"exp-scenario-2",
       [] {
         auto c = simulation("exp-scenario-2", F::ShiftedExponential);
         c.groups = {{25, 1, 0.5, std::nullopt}, {25, 4, 2, std::nullopt},
                     {50, 12, 0.25, std::nullopt}};
         return c;
       }},
      {"exp-scenario-3",
       [] {
         auto c = simulation("exp-scenario-3", F::ShiftedExponential);
         c.random = RandomCluster{100, kRandomScenarioSeed, {1, 4, 12}, {0.5, 2, 0.25}, {}};
         return c;
       }},
      {"weibull-scenario-1",
       [] {
         auto c = simulation("weibull-scenario-1", F::ShiftedWeibull);
         c.groups = {{50, 1, 1, 1.2}, {50, 4, 0.5, 0.8}};
         return c;
       }},
      {"weibull-scenario-2",
       [] {
         auto c = simulation("weibull-scenario-2", F::ShiftedWeibull);
         c.groups = {{25, 1, 0.5, 0.9}, {25, 4, 2, 1.2}, {50, 12, 0.25, 1.5}};
         return c;
       }},
      {"weibull-scenario-3",
       [] {
         auto c = simulation("weibull-scenario-3", F::ShiftedWeibull);
         c.random =
             RandomCluster{100, kRandomScenarioSeed, {1, 4, 12}, {0.5, 2, 0.25}, {0.9, 1.2, 1.5}};
         return c;
       }},
      {"ec2-scenario-1", [] { return ec2("ec2-scenario-1", 4, 6, 0.5); }},
      {"ec2-scenario-2", [] { return ec2("ec2-scenario-2", 6, 9, 0.5); }},
      {"ec2-scenario-3", [] { return ec2("ec2-scenario-3", 6, 9, 1.0); }},
      {"budget-1", [] { return budget_example("budget-1", {{0.5, 2, 10}, {0.25, 4, 10}}, 860); }},
      {"budget-2",
       [] {
         return budget_example("budget-2", {{1, 1, 10}, {0.5, 2, 10}, {0.125, 8, 10}}, 475);
       }},
  };
  return reg;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument("invalid scenario: " + join(errors, "; ")), errors_(std::move(errors)) {}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

ScenarioConfig builtin(std::string_view name) {
  const auto it = registry().find(std::string(name));
  if (it == registry().end()) {
    throw std::invalid_argument("unknown scenario '" + std::string(name) +
                                "'; builtins: " + join(builtin_names(), ", "));
  }
  return it->second();
}

std::vector<std::string> validation_errors(const ScenarioConfig& c) {
  std::vector<std::string> e;
  const bool weibull = c.family == RuntimeFamily::ShiftedWeibull;
  check_value(e, "name", !c.name.empty(), "must not be empty");
  check_value(e, "r", c.r >= 1, "must be >= 1");
  check_value(e, "trials", c.trials >= 1, "must be >= 1");
  check_value(e, "schemes", !c.schemes.empty(), "must not be empty");
  std::set<Scheme> seen;
  for (std::size_t i = 0; i < c.schemes.size(); ++i) {
    check_value(e, "schemes[" + std::to_string(i) + "]", seen.insert(c.schemes[i]).second,
                "duplicate scheme");
  }

  if (!c.groups.empty() && c.random) e.push_back("cluster: groups and random are exclusive");
  if (c.groups.empty() && !c.random && !c.budget) {
    e.push_back("cluster: missing (needs groups, random, or a budget section)");
  }
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    const auto& g = c.groups[i];
    const std::string p = "cluster.groups[" + std::to_string(i) + "]";
    check_value(e, p + ".count", g.count >= 1, "must be >= 1");
    check_value(e, p + ".a", positive_finite(g.a), "must be > 0");
    check_value(e, p + ".mu", positive_finite(g.mu), "must be > 0");
    if (weibull) {
      check_value(e, p + ".alpha", g.alpha.has_value(), "required for weibull");
      if (g.alpha) check_value(e, p + ".alpha", positive_finite(*g.alpha), "must be > 0");
    } else {
      check_value(e, p + ".alpha", !g.alpha.has_value(), "not allowed for exponential");
    }
  }
  if (c.random) {
    const auto& rc = *c.random;
    const std::string p = "cluster.random";
    check_value(e, p + ".n", rc.n >= 1, "must be >= 1");
    auto check_set = [&](const std::string& field, const std::vector<double>& set) {
      check_value(e, p + "." + field, !set.empty(), "must not be empty");
      for (std::size_t i = 0; i < set.size(); ++i) {
        check_value(e, p + "." + field + "[" + std::to_string(i) + "]", positive_finite(set[i]),
                    "must be > 0");
      }
    };
    check_set("a", rc.a_set);
    check_set("mu", rc.mu_set);
    if (weibull) {
      check_set("alpha", rc.alpha_set);
    } else {
      check_value(e, p + ".alpha", rc.alpha_set.empty(), "not allowed for exponential");
    }
  }

  if (c.coding == CodingMode::Lt) {
    check_value(e, "coding.c", positive_finite(c.lt.c), "must be > 0");
    check_value(e, "coding.delta", c.lt.delta > 0.0 && c.lt.delta < 1.0, "must be in (0, 1)");
    check_value(e, "coding.epsilon", std::isfinite(c.lt.epsilon) && c.lt.epsilon >= 0.0,
                "must be >= 0");
    check_value(e, "r", c.r >= 2, "LT coding needs r >= 2");
  }
  check_value(e, "straggler.p", c.straggler.p >= 0.0 && c.straggler.p <= 1.0, "must be in [0, 1]");
  check_value(e, "straggler.slowdown", std::isfinite(c.straggler.slowdown) && c.straggler.slowdown >= 1.0,
              "must be >= 1");

  if (c.budget) {
    const auto& b = *c.budget;
    check_value(e, "budget.classes", !b.classes.empty(), "must not be empty");
    bool classes_ok = !b.classes.empty();
    for (std::size_t i = 0; i < b.classes.size(); ++i) {
      const auto& mc = b.classes[i];
      const std::string p = "budget.classes[" + std::to_string(i) + "]";
      const std::size_t before = e.size();
      check_value(e, p + ".a", positive_finite(mc.a), "must be > 0");
      check_value(e, p + ".mu", positive_finite(mc.mu), "must be > 0");
      check_value(e, p + ".available", mc.available >= 0, "must be >= 0");
      classes_ok = classes_ok && e.size() == before;
    }
    check_value(e, "budget.kappa", positive_finite(b.cost.kappa), "must be > 0");
    check_value(e, "budget.gamma", std::isfinite(b.cost.gamma), "must be finite");
    check_value(e, "budget.budget", std::isfinite(b.budget) && b.budget >= 0.0, "must be >= 0");
    if (classes_ok && c.r >= 1) {
      try {
        BudgetScenario(b.classes, b.cost, c.r, b.budget);
      } catch (const std::invalid_argument& ex) {
        e.push_back(std::string("budget: ") + ex.what());
      }
    }
    check_value(e, "family", !weibull, "budget scenarios use the exponential model");
  }
  return e;
}

void validate(const ScenarioConfig& config) {
  auto errors = validation_errors(config);
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

ScenarioConfig parse_scenario(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& ex) {
    throw ConfigError({std::string("<root>: not valid JSON: ") + ex.what()});
  }
  std::vector<std::string> errors;
  ScenarioConfig cfg;
  {
    Reader rd(root, "", errors);
    cfg.name = rd.get<std::string>("name").value_or("");
    if (auto fam = rd.get<std::string>("family")) {
      if (auto f = family_from_string(*fam)) {
        cfg.family = *f;
      } else {
        rd.error("family", "expected 'exponential' or 'weibull', got '" + *fam + "'");
      }
    }
    if (const Json* cl = rd.child("cluster", false)) parse_cluster(*cl, cfg, errors);
    cfg.r = rd.get<std::int64_t>("r").value_or(0);
    if (const Json* s = rd.child("schemes", false)) {
      cfg.schemes.clear();
      if (!s->is_array()) {
        rd.error("schemes", "expected an array");
      } else {
        for (std::size_t i = 0; i < s->size(); ++i) {
          const auto& v = (*s)[i];
          const auto scheme = v.is_string() ? scheme_from_string(v.get<std::string>()) : std::nullopt;
          if (scheme) {
            cfg.schemes.push_back(*scheme);
          } else {
            rd.error("schemes[" + std::to_string(i) + "]", "unknown scheme " + v.dump());
          }
        }
      }
    }
    if (const Json* cd = rd.child("coding", false)) {
      Reader cr(*cd, "coding", errors);
      const auto type = cr.get<std::string>("type").value_or("rlc");
      if (type == "rlc") {
        cfg.coding = CodingMode::Rlc;
      } else if (type == "lt") {
        cfg.coding = CodingMode::Lt;
        cfg.lt.c = cr.get<double>("c").value_or(0.0);
        cfg.lt.delta = cr.get<double>("delta").value_or(0.0);
        cfg.lt.epsilon = cr.get<double>("epsilon").value_or(0.0);
      } else {
        cr.error("coding.type", "expected 'rlc' or 'lt', got '" + type + "'");
      }
    }
    if (const Json* st = rd.child("straggler", false)) {
      Reader sr(*st, "straggler", errors);
      cfg.straggler.p = sr.get<double>("p").value_or(0.0);
      cfg.straggler.slowdown = sr.get<double>("slowdown").value_or(4.0);
    }
    if (auto t = rd.get<std::int64_t>("trials", false)) cfg.trials = *t;
    cfg.output = rd.get<std::string>("output", false).value_or("");
    if (const Json* b = rd.child("budget", false)) parse_budget(*b, cfg, errors);
  }
  // Fields that failed to read fall back to defaults; only report them once.
  auto field = [](const std::string& e) { return e.substr(0, e.find(": ")); };
  std::set<std::string> unread;
  for (const auto& e : errors) unread.insert(field(e));
  for (auto& e : validation_errors(cfg)) {
    if (!unread.count(field(e))) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open"});
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigError& ex) {
    std::vector<std::string> errors;
    for (const auto& e : ex.errors()) errors.push_back(path.string() + ": " + e);
    throw ConfigError(std::move(errors));
  }
}

ScenarioConfig resolve_scenario(const std::string& ref) {
  if (registry().count(ref)) return builtin(ref);
  if (std::filesystem::exists(ref)) return load_scenario(ref);
  throw std::invalid_argument("scenario '" + ref + "' is neither a builtin (" +
                              join(builtin_names(), ", ") + ") nor an existing file");
}

std::string serialize(const ScenarioConfig& c) {
  Json root;
  root["name"] = c.name;
  root["family"] = to_string(c.family);
  if (!c.groups.empty()) {
    Json groups = Json::array();
    for (const auto& g : c.groups) {
      Json j;
      j["count"] = g.count;
      j["a"] = g.a;
      j["mu"] = g.mu;
      if (g.alpha) j["alpha"] = *g.alpha;
      groups.push_back(j);
    }
    root["cluster"]["groups"] = groups;
  } else if (c.random) {
    Json j;
    j["n"] = c.random->n;
    j["seed"] = c.random->seed;
    j["a"] = c.random->a_set;
    j["mu"] = c.random->mu_set;
    if (!c.random->alpha_set.empty()) j["alpha"] = c.random->alpha_set;
    root["cluster"]["random"] = j;
  }
  root["r"] = c.r;
  Json schemes = Json::array();
  for (Scheme s : c.schemes) schemes.push_back(to_string(s));
  root["schemes"] = schemes;
  if (c.coding == CodingMode::Lt) {
    root["coding"] = {{"type", "lt"}, {"c", c.lt.c}, {"delta", c.lt.delta}, {"epsilon", c.lt.epsilon}};
  } else {
    root["coding"] = {{"type", "rlc"}};
  }
  root["straggler"] = {{"p", c.straggler.p}, {"slowdown", c.straggler.slowdown}};
  root["trials"] = c.trials;
  root["output"] = c.output;
  if (c.budget) {
    Json classes = Json::array();
    for (const auto& mc : c.budget->classes) {
      classes.push_back({{"a", mc.a}, {"mu", mc.mu}, {"available", mc.available}});
    }
    root["budget"] = {{"classes", classes},
                      {"kappa", c.budget->cost.kappa},
                      {"gamma", c.budget->cost.gamma},
                      {"budget", c.budget->budget}};
  }
  return root.dump(2) + "\n";
}

ClusterSpec resolve_cluster(const ScenarioConfig& c) {
  validate(c);
  const bool weibull = c.family == RuntimeFamily::ShiftedWeibull;
  auto model = [&](double a, double mu, double alpha) {
    return weibull ? RuntimeModel::weibull(a, mu, alpha) : RuntimeModel::exponential(a, mu);
  };
  std::vector<RuntimeModel> models;
  if (!c.groups.empty()) {
    for (const auto& g : c.groups) {
      for (std::int64_t i = 0; i < g.count; ++i) models.push_back(model(g.a, g.mu, g.alpha.value_or(1.0)));
    }
  } else if (c.random) {
    const auto& rc = *c.random;
    Rng rng(rc.seed);
    for (std::int64_t i = 0; i < rc.n; ++i) {
      const double a = rc.a_set[rng.below(rc.a_set.size())];
      const double mu = rc.mu_set[rng.below(rc.mu_set.size())];
      const double alpha = weibull ? rc.alpha_set[rng.below(rc.alpha_set.size())] : 1.0;
      models.push_back(model(a, mu, alpha));
    }
  } else {
    for (const auto& mc : c.budget->classes) {
      for (std::int64_t i = 0; i < mc.available; ++i) models.push_back(model(mc.a, mc.mu, 1.0));
    }
  }
  auto cluster = ClusterSpec::from_models(models);
  cluster.validate();
  return cluster;
}

BudgetScenario budget_scenario(const ScenarioConfig& c) {
  validate(c);
  if (!c.budget) throw std::invalid_argument("scenario '" + c.name + "' has no budget section");
  return BudgetScenario(c.budget->classes, c.budget->cost, c.r, c.budget->budget);
}

std::optional<LtCodeSpec> lt_spec(const ScenarioConfig& c) {
  if (c.coding != CodingMode::Lt) return std::nullopt;
  return robust_soliton(static_cast<std::size_t>(c.r), c.lt.c, c.lt.delta, c.lt.epsilon);
}

}  // namespace hcmm
