#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hcmm/scenarios.hpp"
#include "json.hpp"

using namespace hcmm;
using nlohmann::ordered_json;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.errors().begin(), e.errors().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> parse_errors(const ordered_json& j) {
  try {
    parse_scenario(j.dump());
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_starts_with(const std::vector<std::string>& errors, const std::string& prefix) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_SUITE("scenarios") {
  TEST_CASE("every builtin validates and round-trips byte for byte") {
    const auto names = builtin_names();
    CHECK(names.size() == 11);
    for (const auto& name : names) {
      CAPTURE(name);
      const auto cfg = builtin(name);
      CHECK(cfg.name == name);
      CHECK(validation_errors(cfg).empty());
      const auto text = serialize(cfg);
      const auto back = parse_scenario(text);
      CHECK(back == cfg);
      CHECK(serialize(back) == text);
    }
    CHECK_THROWS_AS(builtin("no-such-scenario"), std::invalid_argument);
  }

  TEST_CASE("exp-scenario-1 layout") {
    const auto cfg = builtin("exp-scenario-1");
    const auto cluster = resolve_cluster(cfg);
    REQUIRE(cluster.size() == 100);
    CHECK(cluster.workers[0].model == RuntimeModel::exponential(1, 1));
    CHECK(cluster.workers[99].model == RuntimeModel::exponential(4, 0.5));
    CHECK(cfg.r == 10000);
  }

  TEST_CASE("budget-1 layout") {
    const auto cfg = builtin("budget-1");
    REQUIRE(cfg.budget.has_value());
    CHECK(cfg.budget->classes == std::vector<MachineClass>{{0.5, 2, 10}, {0.25, 4, 10}});
    CHECK(cfg.budget->cost == CostModel{1, 2});
    CHECK(cfg.budget->budget == 860.0);
    CHECK(cfg.r == 100);
    CHECK(resolve_cluster(cfg).size() == 20);
  }

  TEST_CASE("weibull-scenario-3 is a seeded random cluster") {
    const auto cfg = builtin("weibull-scenario-3");
    REQUIRE(cfg.random.has_value());
    CHECK(cfg.random->a_set == std::vector<double>{1, 4, 12});
    CHECK(cfg.random->mu_set == std::vector<double>{0.5, 2, 0.25});
    CHECK(cfg.random->alpha_set == std::vector<double>{0.9, 1.2, 1.5});
    const auto one = resolve_cluster(cfg);
    CHECK(one == resolve_cluster(cfg));
    CHECK(one.size() == 100);
    for (const auto& w : one.workers) {
      CHECK(w.model.family == RuntimeFamily::ShiftedWeibull);
      CHECK(std::count(cfg.random->alpha_set.begin(), cfg.random->alpha_set.end(), w.model.alpha) == 1);
    }
    auto other = cfg;
    other.random->seed = 2;
    CHECK_FALSE(resolve_cluster(other) == one);
  }

  TEST_CASE("alpha on an exponential group names the field") {
    auto j = ordered_json::parse(serialize(builtin("exp-scenario-1")));
    j["cluster"]["groups"][1]["alpha"] = 1.5;
    const auto errors = parse_errors(j);
    CHECK(any_starts_with(errors, "cluster.groups[1].alpha"));
  }

  TEST_CASE("negative mu is rejected") {
    auto j = ordered_json::parse(serialize(builtin("exp-scenario-2")));
    j["cluster"]["groups"][0]["mu"] = -1.0;
    CHECK(any_starts_with(parse_errors(j), "cluster.groups[0].mu"));
  }

  TEST_CASE("several errors are reported together") {
    auto j = ordered_json::parse(serialize(builtin("weibull-scenario-1")));
    j["cluster"]["groups"][0].erase("alpha");
    j["r"] = 0;
    j["straggler"]["p"] = 2.0;
    j["colour"] = "blue";
    const auto errors = parse_errors(j);
    CHECK(errors.size() >= 4);
    CHECK(any_starts_with(errors, "cluster.groups[0].alpha"));
    CHECK(any_starts_with(errors, "r"));
    CHECK(any_starts_with(errors, "straggler.p"));
    CHECK(any_starts_with(errors, "colour"));
  }

  TEST_CASE("malformed json is a config error") {
    CHECK_THROWS_AS(parse_scenario("{ not json"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[]"), ConfigError);
  }

  TEST_CASE("lt coding parameters") {
    const auto cfg = builtin("ec2-scenario-1");
    CHECK(cfg.coding == CodingMode::Lt);
    const auto spec = lt_spec(cfg);
    REQUIRE(spec.has_value());
    CHECK(spec->k == static_cast<std::size_t>(cfg.r));
    CHECK(spec->epsilon == 0.13);
    CHECK_FALSE(lt_spec(builtin("exp-scenario-1")).has_value());
  }

  TEST_CASE("files and builtin names both resolve") {
    const auto dir = std::filesystem::temp_directory_path() / "hcmm-scenario-test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "mine.json";
    auto cfg = builtin("exp-scenario-2");
    cfg.name = "mine";
    cfg.trials = 77;
    {
      std::ofstream out(path);
      out << serialize(cfg);
    }
    CHECK(load_scenario(path) == cfg);
    CHECK(resolve_scenario(path.string()) == cfg);
    CHECK(resolve_scenario("exp-scenario-2") == builtin("exp-scenario-2"));
    CHECK_THROWS(resolve_scenario((dir / "missing.json").string()));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("config error message lists every problem") {
    try {
      auto j = ordered_json::parse(serialize(builtin("exp-scenario-1")));
      j["trials"] = -3;
      j["cluster"]["groups"][0]["count"] = 0;
      parse_scenario(j.dump());
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(mentions(e, "trials"));
      CHECK(mentions(e, "count"));
      CHECK(std::string(e.what()).find("trials") != std::string::npos);
    }
  }
}
