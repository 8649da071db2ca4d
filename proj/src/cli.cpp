#include "cardest/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cardest/analysis.hpp"
#include "cardest/config.hpp"
#include "cardest/csv.hpp"
#include "cardest/errors.hpp"
#include "cardest/estimation.hpp"
#include "cardest/validation.hpp"

namespace cardest::cli {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return csv::number(v); }
std::string num(int v) { return csv::number(static_cast<std::int64_t>(v)); }
std::string num(std::uint32_t v) { return csv::number(static_cast<std::int64_t>(v)); }
std::string num(std::size_t v) { return csv::number(static_cast<std::int64_t>(v)); }

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Output file rooted at the run directory; flushed and checked on close().
class OutFile {
 public:
  OutFile(const fs::path& dir, const std::string& name) : path_(dir / name), out_(path_, std::ios::binary) {
    if (!out_) throw IoError("cannot write '" + path_.string() + "'");
  }
  std::ostream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& outputs, const std::vector<std::string>& extra) {
  OutFile f(dir, "manifest.txt");
  auto& o = f.stream();
  o << "# cardest run manifest; usable as --config to reproduce\n"
    << "# tool_version=" << kVersion << '\n'
    << "# timestamp=" << timestamp_utc() << '\n'
    << "# command=" << command << '\n'
    << "# base_seed=" << cfg.seed << '\n'
    << "# outputs=";
  for (std::size_t i = 0; i < outputs.size(); ++i) o << (i ? "," : "") << outputs[i];
  o << '\n';
  for (const auto& line : extra) o << "# " << line << '\n';
  o << to_config_text(cfg);
  f.close();
}

template <typename T>
std::vector<T> parse_list(const std::string& name, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    RunConfig scratch;
    // Reuse the config number parser for consistent error messages.
    if constexpr (std::is_same_v<T, int>) {
      apply_setting(scratch, "rounds", item);
      out.push_back(scratch.rounds);
    } else {
      apply_setting(scratch, "f_initial", item);
      out.push_back(scratch.f_initial);
    }
  }
  if (out.empty()) throw InvalidConfig("empty list for " + name);
  return out;
}

// Options shared by the config-driven subcommands.
struct ConfigOptions {
  std::string config_path;
  std::string out_dir = ".";
  unsigned jobs = 1;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> flags;

  void attach(CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key=value configuration file");
    sub->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("-j,--jobs", jobs, "worker threads")->capture_default_str();
    for (const auto& key : config_keys()) {
      std::string flag = key;
      for (auto& ch : flag) ch = ch == '_' ? '-' : ch;
      flags.emplace_back(key, sub->add_option("--" + flag, values[key], "override config key " + key));
    }
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (const char* env = std::getenv("CARDEST_SEED"); env != nullptr && *env != '\0') {
      apply_setting(cfg, "seed", env);
    }
    if (!config_path.empty()) apply_config_text(cfg, read_file(config_path));
    for (const auto& [key, opt] : flags) {
      if (opt->count() > 0) apply_setting(cfg, key, values.at(key));
    }
    cfg.validate();
    if (jobs < 1) throw InvalidConfig("--jobs must be at least 1");
    return cfg;
  }
};

int cmd_simulate(const ConfigOptions& opts, bool trace, std::ostream& out) {
  const RunConfig cfg = opts.resolve();
  const TrialConfig tc = cfg.to_trial_config(opts.jobs);
  const auto dir = prepare_dir(opts.out_dir);
  const auto res = run_trials(tc);

  OutFile est(dir, "estimates.csv");
  csv::row(est.stream(), {"seed", "n", "n_max", "K", "t", "f_initial", "q", "regime", "z_count", "alpha_product",
                          "n_hat"});
  for (const auto& r : res.per_trial) {
    csv::row(est.stream(), {std::to_string(r.seed), num(cfg.n), num(cfg.n_max), num(cfg.queried), num(cfg.rounds),
                            num(cfg.f_initial), num(cfg.erasure), to_string(r.regime), num(r.z_count),
                            num(r.alpha_product), num(r.n_hat)});
  }
  est.close();

  std::vector<std::string> outputs{"estimates.csv"};
  if (trace) {
    OutFile tr(dir, "trace.csv");
    trace_trial(tc, 0, tr.stream());
    tr.close();
    outputs.emplace_back("trace.csv");
  }
  write_manifest(dir, "simulate", cfg, outputs, {});

  out << "trials=" << res.trials << " mean_z=" << num(res.z.mean) << " mean_n_hat=" << num(res.n_hat.mean)
      << " mean_coverage=" << num(res.coverage.mean) << '\n';
  return kOk;
}

struct SweepGrids {
  std::string k_grid, t_grid, f_grid, q_grid;
};

int cmd_sweep(const ConfigOptions& opts, const std::string& figure, const SweepGrids& g, std::ostream& out) {
  if (figure != "fig1" && figure != "fig2" && figure != "fig3" && figure != "fig4") {
    throw InvalidConfig("unknown figure '" + figure + "' (expected fig1, fig2, fig3 or fig4)");
  }
  const RunConfig cfg = opts.resolve();
  const TrialConfig tc = cfg.to_trial_config(opts.jobs);

  auto ints = [](const std::string& name, const std::string& given, const char* dflt) {
    return parse_list<int>(name, given.empty() ? std::string(dflt) : given);
  };
  auto reals = [](const std::string& name, const std::string& given, const char* dflt) {
    return parse_list<double>(name, given.empty() ? std::string(dflt) : given);
  };

  std::ostringstream table, longform;
  csv::row(longform, {"figure", "series", "x_name", "x", "y_name", "y"});
  std::vector<std::string> grid_notes;

  if (figure == "fig1") {
    const auto ks = ints("k-grid", g.k_grid, "5,10,15,20,25,30,35,40,50,60,70");
    const auto ts = ints("t-grid", g.t_grid, "2,4,6,8");
    const auto fs_ = reals("f-grid", g.f_grid, "0.2,0.5,0.8");
    std::vector<TimeFPair> combos;
    for (int t : ts)
      for (double f : fs_) combos.push_back({t, f});
    const auto results = sweep_queried_vs_estimated(tc, ks, combos);
    csv::row(table, {"K", "t", "F", "mean_estimated", "ci_lo", "ci_hi", "mean_coverage", "mean_n_hat", "trials"});
    for (const auto& r : results) {
      csv::row(table, {num(r.queried), num(r.rounds), num(r.f_initial), num(r.z.mean), num(r.z.ci_lo),
                       num(r.z.ci_hi), num(r.coverage.mean), num(r.n_hat.mean), num(r.trials)});
      csv::row(longform, {"fig1", "t=" + num(r.rounds) + ";F=" + num(r.f_initial), "K", num(r.queried),
                          "mean_estimated", num(r.z.mean)});
    }
    grid_notes = {"figure=fig1", "k_grid=" + (g.k_grid.empty() ? "default" : g.k_grid),
                  "t_grid=" + (g.t_grid.empty() ? "default" : g.t_grid),
                  "f_grid=" + (g.f_grid.empty() ? "default" : g.f_grid)};
  } else if (figure == "fig2") {
    const auto fs_ = reals("f-grid", g.f_grid, "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9");
    const auto ks = ints("k-grid", g.k_grid, "10,20,35");
    const auto results = time_to_coverage(tc, cfg.coverage_threshold, fs_, ks, cfg.round_cap, cfg.coverage_metric);
    csv::row(table, {"F", "K", "mean_time_to_95", "censored_fraction", "time_ci_lo", "time_ci_hi", "trials"});
    for (const auto& r : results) {
      csv::row(table, {num(r.f_initial), num(r.queried), num(r.time.mean), num(r.censored_fraction),
                       num(r.time.ci_lo), num(r.time.ci_hi), num(r.trials)});
      csv::row(longform, {"fig2", "K=" + num(r.queried), "F", num(r.f_initial), "mean_time_to_95", num(r.time.mean)});
    }
    grid_notes = {"figure=fig2", "f_grid=" + (g.f_grid.empty() ? "default" : g.f_grid),
                  "k_grid=" + (g.k_grid.empty() ? "default" : g.k_grid)};
  } else {
    std::vector<GridPoint> grid;
    if (figure == "fig3") {
      const auto qs = reals("q-grid", g.q_grid, "0,0.1,0.2,0.3,0.4,0.5");
      const auto ts = ints("t-grid", g.t_grid, "2,4,6,8");
      for (int t : ts)
        for (double q : qs) grid.push_back({t, cfg.f_initial, q});
      csv::row(table, {"q", "t", "F", "K_required", "coverage_at_K", "censored", "monotone", "trials"});
      grid_notes = {"figure=fig3", "q_grid=" + (g.q_grid.empty() ? "default" : g.q_grid),
                    "t_grid=" + (g.t_grid.empty() ? "default" : g.t_grid)};
    } else {
      const auto ts = ints("t-grid", g.t_grid, "1,2,3,4,5,6,7,8,9,10");
      const auto fs_ = reals("f-grid", g.f_grid, "0.2,0.5,0.8");
      for (double f : fs_)
        for (int t : ts) grid.push_back({t, f, cfg.erasure});
      csv::row(table, {"t", "F", "q", "K_required", "coverage_at_K", "censored", "monotone", "trials"});
      grid_notes = {"figure=fig4", "t_grid=" + (g.t_grid.empty() ? "default" : g.t_grid),
                    "f_grid=" + (g.f_grid.empty() ? "default" : g.f_grid)};
    }
    const auto results = min_queried_for_coverage(tc, cfg.coverage_threshold, grid, cfg.coverage_metric);
    for (const auto& r : results) {
      const std::string k = r.k ? num(*r.k) : "nan";
      const std::string cov = r.k ? num(r.coverage_at_k) : "nan";
      const std::string censored = r.k ? "0" : "1";
      const std::string mono = r.monotone ? "1" : "0";
      if (figure == "fig3") {
        csv::row(table, {num(r.point.q), num(r.point.rounds), num(r.point.f_initial), k, cov, censored, mono,
                         num(r.trials)});
        csv::row(longform, {"fig3", "t=" + num(r.point.rounds), "q", num(r.point.q), "K_required", k});
      } else {
        csv::row(table, {num(r.point.rounds), num(r.point.f_initial), num(r.point.q), k, cov, censored, mono,
                         num(r.trials)});
        csv::row(longform, {"fig4", "F=" + num(r.point.f_initial), "t", num(r.point.rounds), "K_required", k});
      }
    }
  }

  const auto dir = prepare_dir(opts.out_dir);
  OutFile t(dir, figure + ".csv");
  t.stream() << table.str();
  t.close();
  OutFile l(dir, figure + "_long.csv");
  l.stream() << longform.str();
  l.close();
  write_manifest(dir, "sweep", cfg, {figure + ".csv", figure + "_long.csv"}, grid_notes);
  out << "wrote " << (dir / (figure + ".csv")).string() << '\n';
  return kOk;
}

int cmd_topology(const ConfigOptions& opts, std::ostream& out) {
  const RunConfig cfg = opts.resolve();
  if (!cfg.topology) throw InvalidConfig("topology mode is off (set topology=true)");
  const TrialConfig tc = cfg.to_trial_config(opts.jobs);
  const auto dir = prepare_dir(opts.out_dir);

  const TrialRun trial = run_single_trial(tc, 0);
  const Topology found = reconstruct_topology(trial.query, tc.field);
  const TopologyComparison cmp = compare_topology(found, *trial.net);

  OutFile v(dir, "vertices.csv");
  csv::row(v.stream(), {"node", "x", "y"});
  for (NodeId id : found.vertices) {
    const Point p = trial.query.coords->at(id);
    csv::row(v.stream(), {num(index_of(id)), num(p.x), num(p.y)});
  }
  v.close();

  OutFile e(dir, "edges.csv");
  csv::row(e.stream(), {"a", "b"});
  for (const auto& [a, b] : found.edges) csv::row(e.stream(), {num(index_of(a)), num(index_of(b))});
  e.close();

  OutFile r(dir, "topology_report.csv");
  csv::row(r.stream(), {"true_vertices", "found_vertices", "vertex_recall", "false_vertices", "true_edges",
                        "found_edges", "edge_recall", "false_edges"});
  csv::row(r.stream(), {num(cmp.true_vertices), num(cmp.found_vertices), num(cmp.vertex_recall),
                        num(cmp.false_vertices), num(cmp.true_edges), num(cmp.found_edges), num(cmp.edge_recall),
                        num(cmp.false_edges)});
  r.close();
  write_manifest(dir, "topology", cfg, {"vertices.csv", "edges.csv", "topology_report.csv"}, {});

  out << "vertex_recall=" << num(cmp.vertex_recall) << " edge_recall=" << num(cmp.edge_recall)
      << " false_vertices=" << num(cmp.false_vertices) << " false_edges=" << num(cmp.false_edges) << '\n';
  return kOk;
}

int cmd_validate(const ValidationOptions& opts, std::ostream& out) {
  const auto results = run_validation(opts);
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << num(r.measured)
        << " predicted=" << num(r.predicted) << " tolerance=" << r.tolerance << '\n';
    all = all && r.passed;
  }
  out << (all ? "all checks passed" : "some checks failed") << '\n';
  return all ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network cardinality estimation by gossip and sampled queries"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ConfigOptions sim_opts, sweep_opts, topo_opts;
  bool trace = false;
  auto* simulate = app.add_subcommand("simulate", "run trials and write per-trial estimates");
  sim_opts.attach(simulate);
  simulate->add_flag("--trace", trace, "also write the round trace of the first trial");

  auto* sweep = app.add_subcommand("sweep", "run a figure sweep and write its data table");
  sweep_opts.attach(sweep);
  std::string figure;
  SweepGrids grids;
  sweep->add_option("figure", figure, "fig1 | fig2 | fig3 | fig4")->required();
  sweep->add_option("--k-grid", grids.k_grid, "comma-separated K values");
  sweep->add_option("--t-grid", grids.t_grid, "comma-separated round counts");
  sweep->add_option("--f-grid", grids.f_grid, "comma-separated initial transmit probabilities");
  sweep->add_option("--q-grid", grids.q_grid, "comma-separated erasure probabilities");

  auto* topology = app.add_subcommand("topology", "reconstruct the network graph from one query");
  topo_opts.attach(topology);

  ValidationOptions vopts;
  std::optional<std::uint64_t> vseed;
  auto* validate = app.add_subcommand("validate", "check analytic predictions against simulation");
  validate->add_option("--seed", vseed, "base seed");
  validate->add_option("--only", vopts.only, "run only the named checks");
  validate->add_option("--alpha1-scale", vopts.alpha1_scale, "scale the modelled alpha1 (negative control)");
  validate->add_option("-j,--jobs", vopts.jobs, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_opts, trace, out);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, figure, grids, out);
    if (topology->parsed()) return cmd_topology(topo_opts, out);
    if (validate->parsed()) {
      if (vseed) {
        vopts.seed = *vseed;
      } else if (const char* env = std::getenv("CARDEST_SEED"); env != nullptr && *env != '\0') {
        RunConfig scratch;
        apply_setting(scratch, "seed", env);
        vopts.seed = scratch.seed;
      }
      return cmd_validate(vopts, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidConfig& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  }
  return kInvalidConfig;
}

}  // namespace cardest::cli
