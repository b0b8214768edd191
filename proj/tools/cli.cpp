#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hcmm/allocator.hpp"
#include "hcmm/budget.hpp"
#include "hcmm/coding.hpp"
#include "hcmm/emulator.hpp"
#include "hcmm/matrix_io.hpp"
#include "hcmm/scenarios.hpp"
#include "hcmm/simulator.hpp"
#include "hcmm/version.hpp"

namespace hcmm::cli {

namespace {

// Bad flags or flag combinations detected after parsing.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string scenario;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> trials;
  std::string out;
  std::string scheme;
  bool lt = false;
  bool rlc = false;
  std::optional<double> straggler_p;
  std::optional<double> slowdown;
  std::optional<std::int64_t> r;
  unsigned threads = 1;

  std::vector<std::int64_t> counts;
  std::optional<double> budget;

  std::int64_t cols = 100;
  std::string mode = "virtual";
  std::string matrix;
  std::string data = "auto";
  bool real_delays = false;
  double corrupt = 0.0;

  std::int64_t k = 10000;
  double c = 0.03;
  double delta = 0.1;
  double epsilon = 0.13;
};

std::string metadata(const std::string& command, const Options& o, const std::string& scenario,
                     std::int64_t trials) {
  std::ostringstream os;
  os << "# hcmm " << kVersion << " command=" << command;
  if (!scenario.empty()) os << " scenario=" << scenario;
  os << " seed=" << o.seed;
  if (trials > 0) os << " trials=" << trials;
  return os.str();
}

// CSV goes to --out when given, otherwise to stdout.
void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path path(o.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << text;
  out << "wrote " << o.out << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

ScenarioConfig load(const Options& o) {
  if (o.scenario.empty()) throw UsageError("--scenario is required");
  ScenarioConfig cfg = resolve_scenario(o.scenario);
  if (o.lt && o.rlc) throw UsageError("--lt and --rlc are exclusive");
  if (o.lt) cfg.coding = CodingMode::Lt;
  if (o.rlc) cfg.coding = CodingMode::Rlc;
  if (o.straggler_p) cfg.straggler.p = *o.straggler_p;
  if (o.slowdown) cfg.straggler.slowdown = *o.slowdown;
  if (o.r) cfg.r = *o.r;
  if (o.trials) cfg.trials = *o.trials;
  if (o.budget) {
    if (!cfg.budget) throw UsageError("--budget needs a scenario with a budget section");
    cfg.budget->budget = *o.budget;
  }
  validate(cfg);
  return cfg;
}

Scheme parse_scheme(const std::string& name, Scheme fallback) {
  if (name.empty()) return fallback;
  if (auto s = scheme_from_string(name)) return *s;
  throw UsageError("unknown scheme '" + name +
                   "' (hcmm, uniform-uncoded, load-balanced-uncoded, uniform-coded)");
}

std::string join_counts(std::span<const std::int64_t> counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? ";" : "") + std::to_string(counts[i]);
  return s;
}

// Budget classes are kept sorted by mu; users give counts in file order.
std::vector<std::int64_t> to_sorted(const BudgetScenario& sc, std::span<const std::int64_t> counts) {
  if (counts.size() != sc.classes().size()) {
    throw UsageError("--counts needs " + std::to_string(sc.classes().size()) + " values");
  }
  std::vector<std::int64_t> sorted(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) sorted[sc.input_order()[i]] = counts[i];
  return sorted;
}

std::vector<std::int64_t> to_input(const BudgetScenario& sc, std::span<const std::int64_t> sorted) {
  std::vector<std::int64_t> counts(sorted.size());
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = sorted[sc.input_order()[i]];
  return counts;
}

std::int64_t coded_target(const ScenarioConfig& cfg) {
  if (auto lt = lt_spec(cfg)) return lt->symbols_to_wait_for();
  return cfg.r;
}

Allocation allocate_for(const ScenarioConfig& cfg, const ClusterSpec& cluster, Scheme scheme,
                        const Options& o) {
  UniformCodedOptions uc;
  uc.seed = splitmix64(o.seed + 1);
  uc.threads = o.threads;
  if (scheme == Scheme::UniformCoded) {
    return uniform_coded(cluster, coded_target(cfg), uc, cfg.straggler);
  }
  return allocate(scheme, cluster, is_coded(scheme) ? coded_target(cfg) : cfg.r, uc);
}

ClusterSpec cluster_for(const ScenarioConfig& cfg, const Options& o) {
  if (o.counts.empty()) return resolve_cluster(cfg);
  if (!cfg.budget) throw UsageError("--counts needs a scenario with a budget section");
  const auto sc = budget_scenario(cfg);
  return sc.cluster(to_sorted(sc, o.counts));
}

int cmd_allocate(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto cluster = cluster_for(cfg, o);
  const Scheme scheme = parse_scheme(o.scheme, Scheme::HCMM);
  const auto alloc = allocate_for(cfg, cluster, scheme, o);

  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("allocate", o, cfg.name, 0) << '\n';
  os << "# scheme=" << to_string(scheme) << " workers=" << cluster.size() << " r=" << cfg.r
     << " r_target=" << alloc.r_target << " total_load=" << alloc.total_load()
     << " redundancy=" << redundancy(alloc);
  if (scheme == Scheme::HCMM) os << " tau_star=" << alloc.tau_star;
  os << '\n';
  os << "worker,family,a,mu,alpha,load,exact_load\n";
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const auto& m = cluster.workers[i].model;
    os << cluster.workers[i].id << ',' << to_string(m.family) << ',' << m.a << ',' << m.mu << ','
       << m.shape() << ',' << alloc.loads[i] << ',';
    if (i < alloc.exact_loads.size()) os << alloc.exact_loads[i];
    os << '\n';
  }
  emit(os.str(), o, out);
  return kOk;
}

CompareOptions compare_options(const ScenarioConfig& cfg, const Options& o) {
  CompareOptions opts;
  if (cfg.coding == CodingMode::Lt) opts.lt_epsilon = cfg.lt.epsilon;
  opts.straggler = cfg.straggler;
  opts.trials = cfg.trials;
  opts.seed = o.seed;
  opts.threads = o.threads;
  return opts;
}

std::string compare_csv(const ScenarioConfig& cfg, const Options& o, const SchemeComparison& cmp) {
  SchemeComparison shown = cmp;
  shown.rows.clear();
  for (const auto& row : cmp.rows) {
    if (std::find(cfg.schemes.begin(), cfg.schemes.end(), row.scheme) != cfg.schemes.end()) {
      shown.rows.push_back(row);
    }
  }
  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("compare", o, cfg.name, cfg.trials) << '\n';
  os << "# r=" << cmp.r << " r_coded=" << cmp.r_coded << " hcmm_speedup";
  for (const auto& row : cmp.rows) {
    if (row.scheme != Scheme::HCMM) {
      os << ' ' << to_string(row.scheme) << '=' << cmp.hcmm_speedup_over(row.scheme);
    }
  }
  os << '\n' << to_csv(shown);
  return os.str();
}

SchemeComparison run_compare(const ScenarioConfig& cfg, const Options& o) {
  if (cfg.trials < 2) throw UsageError("--trials must be >= 2 (standard error is undefined)");
  auto cmp = compare_schemes(resolve_cluster(cfg), cfg.r, compare_options(cfg, o));
  if (auto lt = lt_spec(cfg)) {
    Rng rng(o.seed, 7);
    const double peel = measure_peel_seconds(*lt, cmp.r_coded, rng);
    for (auto& row : cmp.rows) {
      if (is_coded(row.scheme)) row.decode_s = peel;
    }
  }
  return cmp;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  emit(compare_csv(cfg, o, run_compare(cfg, o)), o, out);
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  if (cfg.trials < 2) throw UsageError("--trials must be >= 2 (standard error is undefined)");
  const auto cluster = cluster_for(cfg, o);
  const Scheme scheme = parse_scheme(o.scheme, Scheme::HCMM);
  const auto alloc = allocate_for(cfg, cluster, scheme, o);
  const auto est = estimate_expected_time(cluster, alloc.loads, alloc.rows_needed(), cfg.straggler,
                                          cfg.trials, Rng(o.seed), o.threads);
  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("simulate", o, cfg.name, cfg.trials) << '\n';
  os << "scheme,mean_s,stderr_s,redundancy,trials,decode_s\n";
  os << to_string(scheme) << ',' << est.mean << ',' << est.std_error << ','
     << static_cast<double>(alloc.total_load()) / static_cast<double>(cfg.r) << ',' << est.trials
     << ",\n";
  emit(os.str(), o, out);
  return kOk;
}

std::string budget_report(const ScenarioConfig& cfg, const Options& o, const SearchResult& res,
                          const BudgetScenario& sc) {
  const auto bounds = cost_bounds(sc);
  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("budget", o, cfg.name, 0) << '\n';
  os << "# c_min=" << bounds.c_min << " c_max=" << bounds.c_max << " budget=" << sc.budget()
     << " x_xi=" << sc.x_xi() << '\n';
  os << "# feasible=" << (res.feasible ? 1 : 0);
  if (res.feasible) {
    os << " counts=" << join_counts(to_input(sc, res.counts)) << " cost=" << res.cost
       << " time=" << res.time;
  }
  os << " iterations=" << res.iterations << '\n';
  os << "iteration,counts,cost,time\n";
  for (std::size_t i = 0; i < res.path.size(); ++i) {
    os << i + 1 << ',' << join_counts(to_input(sc, res.path[i].counts)) << ','
       << res.path[i].cost << ',' << expected_time(res.path[i].counts, sc) << '\n';
  }
  return os.str();
}

int cmd_budget(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto sc = budget_scenario(cfg);
  const auto res = heuristic_search(sc);
  emit(budget_report(cfg, o, res, sc), o, out);
  return res.feasible ? kOk : kFailed;
}

int cmd_run(const Options& o, std::ostream& out) {
  auto cfg = load(o);
  if (o.mode != "virtual" && o.mode != "concurrent") {
    throw UsageError("--mode must be 'virtual' or 'concurrent'");
  }
  if (o.cols < 1) throw UsageError("--cols must be >= 1");
  if (o.data != "auto" && o.data != "gaussian" && o.data != "integer") {
    throw UsageError("--data must be 'auto', 'gaussian' or 'integer'");
  }
  std::optional<DenseMatrix> file_matrix;
  if (!o.matrix.empty()) {
    file_matrix = read_matrix_file(o.matrix);
    cfg.r = static_cast<std::int64_t>(file_matrix->rows());
    validate(cfg);
  }
  const std::int64_t jobs = o.trials.value_or(1);
  if (jobs < 1) throw UsageError("--trials must be >= 1");

  const auto cluster = cluster_for(cfg, o);
  const Scheme scheme = parse_scheme(o.scheme, Scheme::HCMM);
  const auto alloc = allocate_for(cfg, cluster, scheme, o);
  const CodingMode coding = is_coded(scheme) ? cfg.coding : CodingMode::Uncoded;
  const bool integer_data = o.data == "integer" || (o.data == "auto" && coding == CodingMode::Lt);

  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("run", o, cfg.name, jobs) << '\n';
  os << "# scheme=" << to_string(scheme) << " coding=" << to_string(coding) << " r=" << cfg.r
     << " total_load=" << alloc.total_load() << " mode=" << o.mode
     << " data=" << (file_matrix ? "file" : integer_data ? "integer" : "gaussian") << '\n';
  os << "seed," << job_metrics_csv_header() << '\n';
  std::int64_t verified = 0;
  for (std::int64_t j = 0; j < jobs; ++j) {
    JobSpec job;
    job.seed = o.seed + static_cast<std::uint64_t>(j);
    Rng data(job.seed, 1);
    const auto rows = static_cast<std::size_t>(cfg.r);
    const auto cols = static_cast<std::size_t>(o.cols);
    if (file_matrix) {
      job.A = *file_matrix;
    } else {
      job.A = integer_data ? integer_matrix(rows, cols, data) : gaussian_matrix(rows, cols, data);
    }
    job.x = integer_data ? integer_vector(job.A.cols(), data) : gaussian_vector(job.A.cols(), data);
    job.cluster = cluster;
    job.loads = alloc.loads;
    job.coding = coding;
    if (coding == CodingMode::Lt) job.lt = lt_spec(cfg);
    job.straggler = cfg.straggler;
    job.mode = o.mode == "virtual" ? ExecutionMode::Virtual : ExecutionMode::Concurrent;
    job.real_delays = o.real_delays;
    job.corrupt_result = o.corrupt;
    const auto result = run_job(job);
    if (result.metrics.verified()) ++verified;
    os << job.seed << ',' << to_csv_row(result.metrics) << '\n';
  }
  os << "# verified=" << verified << '/' << jobs << '\n';
  emit(os.str(), o, out);
  return verified == jobs ? kOk : kFailed;
}

int cmd_overhead(const Options& o, std::ostream& out) {
  if (o.k < 1) throw UsageError("--k must be >= 1");
  const std::int64_t trials = o.trials.value_or(100);
  if (trials < 1) throw UsageError("--trials must be >= 1");
  const auto spec = robust_soliton(static_cast<std::size_t>(o.k), o.c, o.delta, o.epsilon);
  const Rng root(o.seed);
  const auto est = lt_required_overhead(spec, trials, root);
  const auto symbols = spec.symbols_to_wait_for();
  const double rate = lt_success_rate(spec, symbols, trials, root);
  std::ostringstream os;
  os << std::setprecision(10);
  os << metadata("overhead", o, "", trials) << '\n';
  os << "k,c,delta,trials,mean_symbols,quantile_symbols,failures,epsilon_needed,symbols,success_rate\n";
  os << o.k << ',' << o.c << ',' << o.delta << ',' << trials << ',' << est.mean_symbols << ','
     << est.quantile_symbols << ',' << est.failures << ','
     << static_cast<double>(est.quantile_symbols) / static_cast<double>(o.k) - 1.0 << ','
     << symbols << ',' << rate << '\n';
  emit(os.str(), o, out);
  return kOk;
}

std::string cost_table(const BudgetScenario& sc) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "n1,n2,cost,time\n";
  for (std::int64_t n1 = 0; n1 <= sc.classes()[0].available; ++n1) {
    for (std::int64_t n2 = 0; n2 <= sc.classes()[1].available; ++n2) {
      if (n1 + n2 == 0) continue;
      const std::vector<std::int64_t> counts{n1, n2};
      os << n1 << ',' << n2 << ',' << hcmm_expected_cost(counts, sc) << ','
         << expected_time(counts, sc) << '\n';
    }
  }
  return os.str();
}

int cmd_show(const Options& o, std::ostream& out) {
  if (o.scenario.empty()) {
    for (const auto& name : builtin_names()) out << name << '\n';
    return kOk;
  }
  emit(serialize(resolve_scenario(o.scenario)), o, out);
  return kOk;
}

int cmd_reproduce(const Options& o, std::ostream& out) {
  const std::filesystem::path dir = o.out.empty() ? "results" : o.out;
  std::filesystem::create_directories(dir);
  Options quiet = o;
  quiet.out.clear();

  for (const auto& name : builtin_names()) {
    auto cfg = builtin(name);
    if (o.trials) cfg.trials = *o.trials;
    quiet.scenario = name;
    if (cfg.budget) {
      const auto sc = budget_scenario(cfg);
      write_file(dir / (name + ".csv"), budget_report(cfg, quiet, heuristic_search(sc), sc));
      if (sc.classes().size() == 2) {
        write_file(dir / (name + "-cost-table.csv"),
                   metadata("reproduce", quiet, name, 0) + "\n" + cost_table(sc));
      }
    } else {
      const auto cmp = run_compare(cfg, quiet);
      write_file(dir / (name + ".csv"), compare_csv(cfg, quiet, cmp));
    }
    out << "wrote " << (dir / (name + ".csv")).string() << '\n';
  }

  std::ostringstream loads;
  loads << metadata("reproduce", quiet, "", 0) << '\n' << "scenario,n,hcmm,uniform_coded\n";
  for (const auto& name : builtin_names()) {
    if (name.rfind("ec2-", 0) != 0) continue;
    const auto cfg = builtin(name);
    const auto cluster = resolve_cluster(cfg);
    const auto h = allocate_for(cfg, cluster, Scheme::HCMM, quiet);
    const auto u = allocate_for(cfg, cluster, Scheme::UniformCoded, quiet);
    loads << name << ',' << cluster.size() << ',' << h.total_load() << ',' << u.total_load() << '\n';
  }
  write_file(dir / "ec2-total-load.csv", loads.str());
  out << "wrote " << (dir / "ec2-total-load.csv").string() << '\n';

  Options lt = quiet;
  lt.out = (dir / "lt-overhead.csv").string();
  cmd_overhead(lt, out);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HCMM coded-computation lab", "hcmm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool scenario_flags) {
    sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", o.out, "Output path (default: stdout)");
    sub->add_option("--threads", o.threads, "Worker threads for Monte Carlo")->capture_default_str();
    if (!scenario_flags) return;
    sub->add_option("--scenario", o.scenario, "Builtin scenario name or JSON file")->required();
    sub->add_option("--trials", o.trials, "Override the scenario's trial count");
    sub->add_flag("--lt", o.lt, "Use LT coding");
    sub->add_flag("--rlc", o.rlc, "Use random linear coding");
    sub->add_option("--straggler-p", o.straggler_p, "Straggler probability");
    sub->add_option("--slowdown", o.slowdown, "Straggler total-time multiplier");
    sub->add_option("--r", o.r, "Override the number of rows r");
  };

  auto* allocate_cmd = app.add_subcommand("allocate", "Per-worker loads for one scheme");
  add_common(allocate_cmd, true);
  allocate_cmd->add_option("--scheme", o.scheme, "Scheme (default hcmm)");
  allocate_cmd->add_option("--counts", o.counts, "Machines per budget class, e.g. 10,2")
      ->delimiter(',');

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo completion time of one scheme");
  add_common(simulate_cmd, true);
  simulate_cmd->add_option("--scheme", o.scheme, "Scheme (default hcmm)");
  simulate_cmd->add_option("--counts", o.counts, "Machines per budget class")->delimiter(',');

  auto* compare_cmd = app.add_subcommand("compare", "Compare all four schemes");
  add_common(compare_cmd, true);

  auto* budget_cmd = app.add_subcommand("budget", "Heuristic search under a cost budget");
  add_common(budget_cmd, true);
  budget_cmd->add_option("--budget", o.budget, "Override the budget C");

  auto* run_cmd = app.add_subcommand("run", "Emulate a coded matrix-vector job");
  add_common(run_cmd, true);
  run_cmd->add_option("--scheme", o.scheme, "Scheme (default hcmm)");
  run_cmd->add_option("--counts", o.counts, "Machines per budget class")->delimiter(',');
  run_cmd->add_option("--cols", o.cols, "Columns of the generated matrix")->capture_default_str();
  run_cmd->add_option("--matrix", o.matrix, "Matrix file (CSV or binary) instead of a generated one");
  run_cmd->add_option("--data", o.data, "Generated data: auto (integer for LT), gaussian, integer")
      ->capture_default_str();
  run_cmd->add_option("--mode", o.mode, "virtual or concurrent")->capture_default_str();
  run_cmd->add_flag("--real-delays", o.real_delays, "Stragglers really pause (concurrent mode)");
  run_cmd->add_option("--corrupt", o.corrupt, "Add this to y[0] after decoding (test hook)");

  auto* overhead_cmd = app.add_subcommand("overhead", "LT symbols needed to peel");
  add_common(overhead_cmd, false);
  overhead_cmd->add_option("--k", o.k, "Source symbols")->capture_default_str();
  overhead_cmd->add_option("--c", o.c, "Robust soliton c")->capture_default_str();
  overhead_cmd->add_option("--delta", o.delta, "Robust soliton delta")->capture_default_str();
  overhead_cmd->add_option("--epsilon", o.epsilon, "Overhead checked for success rate")
      ->capture_default_str();
  overhead_cmd->add_option("--trials", o.trials, "Trials (default 100)");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Write every builtin result CSV");
  add_common(reproduce_cmd, false);
  reproduce_cmd->add_option("--trials", o.trials, "Override trial counts");

  auto* show_cmd = app.add_subcommand("show", "List builtins, or print one scenario as JSON");
  show_cmd->add_option("--scenario", o.scenario, "Builtin scenario name or JSON file");
  show_cmd->add_option("--out", o.out, "Output path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return kUsage;
  }

  try {
    if (allocate_cmd->parsed()) return cmd_allocate(o, out);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out);
    if (compare_cmd->parsed()) return cmd_compare(o, out);
    if (budget_cmd->parsed()) return cmd_budget(o, out);
    if (run_cmd->parsed()) return cmd_run(o, out);
    if (overhead_cmd->parsed()) return cmd_overhead(o, out);
    if (reproduce_cmd->parsed()) return cmd_reproduce(o, out);
    if (show_cmd->parsed()) return cmd_show(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace hcmm::cli
