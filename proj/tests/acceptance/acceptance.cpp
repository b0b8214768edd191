#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hcmm/allocator.hpp"
#include "hcmm/budget.hpp"
#include "hcmm/coding.hpp"
#include "hcmm/emulator.hpp"
#include "hcmm/scenarios.hpp"
#include "hcmm/simulator.hpp"
#include "oracles.hpp"

using namespace hcmm;

namespace {

using Counts = std::vector<std::int64_t>;

struct Check {
  std::string what;
  bool pass = false;
};

class Report {
 public:
  void check(bool pass, const std::string& what) { checks_.push_back({what, pass}); }

  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(10);
    os << what << ": got " << got << ", want " << want << " +- " << tol;
    check(std::abs(got - want) <= tol, os.str());
  }

  void within(double got, double lo, double hi, const std::string& what) {
    std::ostringstream os;
    os.precision(10);
    os << what << ": got " << got << ", want in [" << lo << ", " << hi << "]";
    check(got >= lo && got <= hi, os.str());
  }

  void note(const std::string& text) { notes_.push_back(text); }

  bool passed() const {
    for (const auto& c : checks_) {
      if (!c.pass) return false;
    }
    return !checks_.empty();
  }
  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<Check> checks_;
  std::vector<std::string> notes_;
};

std::string counts_str(const Counts& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

BudgetScenario scenario_1() { return budget_scenario(builtin("budget-1")); }
BudgetScenario scenario_2() { return budget_scenario(builtin("budget-2")); }

void budget_example_1(Report& rep) {
  const auto s = scenario_1();
  const auto b = cost_bounds(s);
  rep.near(b.c_min, 629.2, 0.1, "C_min");
  rep.near(b.c_max, 1258.4, 0.1, "C_max");
  const auto res = heuristic_search(s);
  rep.check(res.feasible && res.counts == Counts{10, 2},
            "counts " + counts_str(res.counts) + ", want (10,2)");
  rep.near(res.cost, 808.9, 0.1, "cost");
  rep.near(res.time, 11.23, 0.01, "expected time");
  rep.check(res.iterations == 9, "iterations " + std::to_string(res.iterations) + ", want 9");
}

void budget_example_2(Report& rep) {
  const auto s = scenario_2();
  const auto b = cost_bounds(s);
  rep.near(b.c_min, 314.6, 0.1, "C_min");
  rep.near(b.c_max, 2516.8, 0.1, "C_max");
  const auto res = heuristic_search(s);
  rep.check(res.feasible && res.counts == Counts{10, 6, 0},
            "counts " + counts_str(res.counts) + ", want (10,6,0)");
  rep.near(res.time, 14.3, 0.1, "expected time");
  rep.check(res.iterations == 15, "iterations " + std::to_string(res.iterations) + ", want 15");
  const double overshoot = hcmm_expected_cost(Counts{10, 6, 0}, s);
  rep.near(overshoot, 486.2, 0.1, "cost of (10,6,0)");
  rep.check(overshoot > s.budget(),
            "cost of (10,6,0) exceeds the budget " + std::to_string(s.budget()) +
                " (expected overshoot)");
  if (res.path.size() >= 15) {
    const auto& step = res.path[14];
    std::ostringstream os;
    os << "evaluation 15 visits " << counts_str(step.counts) << " at cost " << step.cost
       << " and time " << expected_time(step.counts, s) << "; strict budget continues to "
       << counts_str(res.counts) << " (cost " << res.cost << ")";
    rep.note(os.str());
  }
}

void cost_table(Report& rep) {
  const auto s = scenario_1();
  rep.near(hcmm_expected_cost(Counts{10, 10}, s), 1048.7, 0.1, "cost (10,10)");
  rep.near(hcmm_expected_cost(Counts{10, 9}, s), 1033.7, 0.1, "cost (10,9)");
  rep.near(hcmm_expected_cost(Counts{10, 8}, s), 1016.4, 0.1, "cost (10,8)");
  rep.near(hcmm_expected_cost(Counts{10, 3}, s), 865.1, 0.1, "cost (10,3)");
  rep.near(expected_time(Counts{10, 10}, s), 5.24, 0.01, "time (10,10)");
  rep.near(expected_time(Counts{10, 3}, s), 9.83, 0.01, "time (10,3)");
}

void solver_properties(Report& rep) {
  double worst_residual = 0.0;
  double worst_alpha1 = 0.0;
  double worst_x = 0.0;
  int points = 0;
  for (double a : {1e-3, 0.1, 1.0, 4.0, 12.0}) {
    for (double mu : {0.05, 0.5, 2.0, 8.0, 1e4}) {
      for (double alpha : {0.7, 1.0, 1.3, 2.0}) {
        const auto m = RuntimeModel::weibull(a, mu, alpha);
        worst_residual = std::max(worst_residual, lambda_residual(m, solve_lambda(m).lambda));
        ++points;
      }
      const auto e = solve_lambda(RuntimeModel::exponential(a, mu));
      const auto w = solve_lambda(RuntimeModel::weibull(a, mu, 1.0));
      worst_alpha1 = std::max(worst_alpha1, std::abs(e.lambda - w.lambda) / e.lambda);
      const double x = solve_x_xi(a * mu);
      worst_x = std::max(worst_x, std::abs(1.0 + mu * e.lambda - x) / x);
    }
  }
  rep.check(points == 100, "grid has " + std::to_string(points) + " points");
  rep.within(worst_residual, 0.0, 1e-9, "worst stationarity residual");
  rep.within(worst_alpha1, 0.0, 1e-9, "worst relative gap, weibull alpha=1 vs exponential");
  rep.within(worst_x, 0.0, 1e-9, "worst relative gap, 1 + mu lambda vs x_xi(a mu)");
}

const std::vector<std::string> kExponential = {"exp-scenario-1", "exp-scenario-2", "exp-scenario-3"};
const std::vector<std::string> kWeibull = {"weibull-scenario-1", "weibull-scenario-2",
                                           "weibull-scenario-3"};

void calibration(Report& rep) {
  for (const auto* group : {&kExponential, &kWeibull}) {
    for (const auto& name : *group) {
      const auto cfg = builtin(name);
      const auto cluster = resolve_cluster(cfg);
      const auto alloc = hcmm_allocate(cluster, cfg.r);
      const double got = expected_aggregate_return(cluster, alloc.exact_loads, alloc.tau_star);
      const double r = static_cast<double>(cfg.r);
      rep.within(got, r - 1e-6 * r, r + 1e-6 * r, name + " expected return at tau*");
    }
  }
}

void reproduction(Report& rep, const std::vector<std::string>& names,
                  const std::array<double, 3>& target, double hcmm_lo, double hcmm_hi,
                  double uc_lo, double uc_hi) {
  const std::array<Scheme, 3> benchmarks = {Scheme::UniformUncoded, Scheme::LoadBalancedUncoded,
                                            Scheme::UniformCoded};
  std::array<double, 3> best = {-1.0, -1.0, -1.0};
  for (const auto& name : names) {
    const auto cfg = builtin(name);
    CompareOptions opts;
    opts.straggler = cfg.straggler;
    opts.trials = cfg.trials;
    opts.seed = 1;
    opts.threads = 0;
    rep.check(opts.trials >= 5000, name + " trials " + std::to_string(opts.trials));
    const auto cmp = compare_schemes(resolve_cluster(cfg), cfg.r, opts);
    const auto& hcmm = cmp.row(Scheme::HCMM);
    std::ostringstream os;
    os.precision(4);
    os << name << ": HCMM " << hcmm.mean_s << " s";
    bool below = true;
    for (std::size_t b = 0; b < 3; ++b) {
      const auto& row = cmp.row(benchmarks[b]);
      below = below && hcmm.mean_s < row.mean_s;
      const double speedup = 100.0 * cmp.hcmm_speedup_over(benchmarks[b]);
      best[b] = std::max(best[b], speedup);
      os << ", " << to_string(benchmarks[b]) << " " << row.mean_s << " s (" << speedup << "%)";
    }
    rep.note(os.str());
    rep.check(below, name + " HCMM mean strictly below all benchmarks");
    rep.within(hcmm.redundancy, hcmm_lo, hcmm_hi, name + " HCMM redundancy");
    rep.within(cmp.row(Scheme::UniformCoded).redundancy, uc_lo, uc_hi,
               name + " Uniform Coded redundancy");
  }
  for (std::size_t b = 0; b < 3; ++b) {
    rep.near(best[b], target[b], 8.0, "best speedup over " + to_string(benchmarks[b]) + " (%)");
  }
}

void uncoded_oracle(Report& rep) {
  int inside = 0;
  int total = 0;
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (std::int64_t n : {1, 2, 5, 10, 50}) {
    for (double a : {0.5, 2.0}) {
      for (double mu : {0.5, 1.0, 4.0}) {
        std::vector<RuntimeModel> models(static_cast<std::size_t>(n), RuntimeModel::exponential(a, mu));
        const auto cluster = ClusterSpec::from_models(models);
        const std::int64_t r = 20 * n;
        const auto alloc = uniform_uncoded(cluster, r);
        const auto est = estimate_expected_time(cluster, alloc.loads, alloc.rows_needed(), {}, 10000,
                                                Rng(seed++), 0);
        const double z = std::abs(est.mean - oracle::uncoded_iid_mean(n, a, mu, r)) / est.std_error;
        worst = std::max(worst, z);
        ++total;
        if (z <= 3.0) ++inside;
      }
    }
  }
  rep.check(inside == total, std::to_string(inside) + "/" + std::to_string(total) +
                                 " grid points within 3 standard errors (worst " +
                                 std::to_string(worst) + ")");
}

void lt_overhead(Report& rep) {
  const auto spec = robust_soliton(10000, 0.03, 0.1, 0.13);
  const double rate = lt_success_rate(spec, 11300, 100, Rng(1));
  rep.within(rate, 0.9, 1.0, "success rate at 11300 symbols over 100 seeds");

  int compared = 0;
  int mismatched = 0;
  int peel_beyond_rank = 0;
  for (std::uint64_t seed = 0; compared < 200 && seed < 5000; ++seed) {
    Rng rng(seed, 9);
    const std::size_t k = 4 + rng.below(37);
    const std::size_t count = k + rng.below(k + 3);
    const auto code = robust_soliton(k, 0.1, 0.5);
    const auto A = gaussian_matrix(k, 1, rng);
    const auto symbols = lt_encode(A, count, code, rng);
    const auto peel = lt_decode_peel(symbols, k);
    const auto elim = oracle::lt_eliminate(symbols, k);
    if (peel.success && !elim.full_rank) ++peel_beyond_rank;
    if (!peel.success || !elim.full_rank) continue;
    ++compared;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(std::abs(peel.values[i] - elim.values[i]) <= 1e-9)) {
        ++mismatched;
        break;
      }
    }
  }
  rep.check(peel_beyond_rank == 0, "peeling never succeeds on a rank-deficient instance");
  rep.check(compared == 200 && mismatched == 0,
            std::to_string(compared) + " decoded instances compared, " +
                std::to_string(mismatched) + " differ beyond 1e-9");
}

std::string emulator_config() {
  auto cfg = builtin("exp-scenario-1");
  cfg.name = "acceptance-rlc";
  cfg.groups = {{5, 1e-3, 2e3, std::nullopt}, {5, 4e-3, 5e2, std::nullopt}};
  cfg.r = 1000;
  cfg.straggler = {0.3, 4.0};
  const auto path = std::filesystem::temp_directory_path() / "hcmm-acceptance-rlc.json";
  std::ofstream(path) << serialize(cfg);
  return path.string();
}

void emulator(Report& rep) {
  const auto path = emulator_config();
  std::ostringstream out, err;
  const int code = cli::run_cli({"run", "--scenario", path, "--trials", "20", "--cols", "100",
                                 "--seed", "1"},
                                out, err);
  rep.check(code == cli::kOk, "hcmm run exit code " + std::to_string(code));
  rep.check(out.str().find("# verified=20/20") != std::string::npos, "20/20 jobs verified");

  const auto cfg = load_scenario(path);
  const auto cluster = resolve_cluster(cfg);
  const auto alloc = hcmm_allocate(cluster, cfg.r);
  double worst = 0.0;
  int same = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng data(seed, 1);
    JobSpec job;
    job.A = gaussian_matrix(1000, 100, data);
    job.x = gaussian_vector(100, data);
    job.cluster = cluster;
    job.loads = alloc.loads;
    job.straggler = cfg.straggler;
    job.seed = seed;
    const auto virt = run_job(job);
    job.mode = ExecutionMode::Concurrent;
    const auto conc = run_job(job);
    worst = std::max(worst, virt.metrics.decoded ? virt.metrics.relative_error() : INFINITY);
    if (virt.metrics.same_outcome(conc.metrics)) ++same;
  }
  rep.within(worst, 0.0, 1e-6, "worst relative error over 20 seeds");
  rep.check(same == 20, std::to_string(same) + "/20 seeds give identical virtual and concurrent metrics");
  std::filesystem::remove(path);
}

void monotonicity(Report& rep) {
  Rng rng(11);
  int fast_violations = 0;
  int slow_violations = 0;
  for (int rep_i = 0; rep_i < 500; ++rep_i) {
    const std::size_t k = 2 + rng.below(4);
    const double xi = 0.05 + 5.0 * rng.uniform();
    std::vector<MachineClass> classes;
    for (std::size_t i = 0; i < k; ++i) {
      const double mu = 0.1 + 10.0 * rng.uniform();
      classes.push_back({xi / mu, mu, static_cast<std::int64_t>(1 + rng.below(20))});
    }
    const CostModel cost{0.1 + 2.0 * rng.uniform(), 1.0 + 2.0 * rng.uniform()};
    const BudgetScenario s(classes, cost, 1 + static_cast<std::int64_t>(rng.below(1000)), 1e12);
    Counts counts;
    for (const auto& c : s.classes()) {
      counts.push_back(1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c.available))));
    }
    const double base = hcmm_expected_cost(counts, s);
    Counts fast = counts;
    --fast.back();
    Counts slow = counts;
    --slow.front();
    if (hcmm_expected_cost(fast, s) > base * (1 + 1e-12)) ++fast_violations;
    if (hcmm_expected_cost(slow, s) < base * (1 - 1e-12)) ++slow_violations;
  }
  rep.check(fast_violations == 0,
            std::to_string(fast_violations) + "/500 fastest-class removals raise the cost");
  rep.check(slow_violations == 0,
            std::to_string(slow_violations) + "/500 slowest-class removals lower the cost");
}

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // 0: no limit
  std::function<void(Report&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "budget example, two classes", 1.0, budget_example_1},
      {2, "budget example, three classes", 1.0, budget_example_2},
      {3, "cost and time table spot checks", 0.0, cost_table},
      {4, "lambda and x_xi solver properties", 0.0, solver_properties},
      {5, "HCMM calibration at tau*", 0.0, calibration},
      {6, "shifted exponential scenarios", 300.0,
       [](Report& r) { reproduction(r, kExponential, {71, 53, 39}, 1.35, 1.52, 2.1, 3.0); }},
      {7, "shifted Weibull scenarios", 300.0,
       [](Report& r) { reproduction(r, kWeibull, {73, 56, 42}, 1.24, 1.48, 1.8, 2.7); }},
      {8, "uncoded harmonic oracle", 0.0, uncoded_oracle},
      {9, "LT overhead and peeling oracle", 0.0, lt_overhead},
      {10, "end-to-end emulator", 0.0, emulator},
      {11, "cost monotonicity under class removal", 0.0, monotonicity},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Report rep;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(rep);
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0) {
      rep.within(secs, 0.0, c.time_limit_s, "runtime (s)");
    }
    const bool pass = rep.passed();
    if (!pass) ++failed;
    std::printf("%s criterion %d: %s (%.2f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs);
    for (const auto& chk : rep.checks()) {
      std::printf("    [%s] %s\n", chk.pass ? "ok" : "x", chk.what.c_str());
    }
    for (const auto& n : rep.notes()) std::printf("    note: %s\n", n.c_str());
    if (c.id == 3) {
      const double x = 3.146;
      std::printf("    diagnostic: with x_xi rounded to %.3f, C_min %.2f, C_max %.2f, cost (10,2) %.2f,"
                  " cost (10,3) %.2f, C_max three classes %.2f\n",
                  x, 100 * x * 2, 100 * x * 4, 100 * x * 72 / 28.0, 100 * x * 88 / 32.0, 100 * x * 8);
    }
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
