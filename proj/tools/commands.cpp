#include "commands.hpp"

#include "config.hpp"

#include "terrasense/observability.hpp"
#include "terrasense/road_profile.hpp"
#include "terrasense/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

namespace terrasense::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> filter;
  std::optional<int> runs;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_json(const RunSummary& run) {
  return json{{"seed", run.seed},
              {"rmse_pct", finite_or_null(run.rmse_pct)},
              {"adaptation_window_s", optional_or_null(run.adaptation_window_s)},
              {"diverged", run.diverged}};
}

json stats_json(const MonteCarloStats& stats) {
  json per_run = json::array();
  for (const auto& run : stats.per_run) per_run.push_back(run_json(run));
  return json{{"mean_rmse_pct", finite_or_null(stats.mean_rmse_pct)},
              {"std_rmse_pct", finite_or_null(stats.std_rmse_pct)},
              {"mean_adaptation_s", optional_or_null(stats.mean_adaptation_s)},
              {"diverged_count", stats.diverged_count},
              {"unbounded_count", stats.unbounded_count},
              {"per_run", std::move(per_run)}};
}

RunConfig prepare(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (o.filter) {
    try {
      cfg.scenario.filter = filter_kind_from_string(*o.filter);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--filter: ") + e.what());
    }
  }
  if (o.runs) cfg.runs = *o.runs;
  if (o.threads) cfg.threads = *o.threads;
  if (o.seed) cfg.scenario.seed = *o.seed;
  if (o.out) cfg.output_directory = *o.out;
  return cfg;
}

fs::path output_file(const RunConfig& cfg, const char* name) {
  std::error_code ec;
  fs::create_directories(cfg.output_directory, ec);
  if (ec) {
    throw UsageError("cannot create output directory '" + cfg.output_directory.string() +
                     "': " + ec.message());
  }
  return cfg.output_directory / name;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path.string() + "'");
  return f;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream f = open_output(path);
  f << doc.dump(2) << '\n';
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const TruthTrajectory truth = simulate_truth(cfg.scenario);
  const fs::path path = output_file(cfg, "truth.csv");
  {
    std::ofstream f = open_output(path);
    write_truth_csv(f, truth, cfg.precision);
  }
  const Eigen::VectorXd z_rms =
      (truth.measurements.array().square().colwise().mean()).sqrt().transpose();
  out << "samples " << truth.size() << ", duration " << cfg.scenario.duration() << " s, seed "
      << cfg.scenario.seed << "\n";
  out << "acceleration rms (m/s^2):";
  for (Eigen::Index i = 0; i < z_rms.size(); ++i) out << ' ' << z_rms(i);
  out << "\nwrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_estimate(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const EstimationResult r = run_estimation(cfg.scenario);
  const fs::path csv = output_file(cfg, "estimate.csv");
  {
    std::ofstream f = open_output(csv);
    write_result_csv(f, r, cfg.precision);
  }
  const json summary{{"filter", to_string(cfg.scenario.filter)},
                     {"seed", cfg.scenario.seed},
                     {"rmse_pct", finite_or_null(r.rmse_pct)},
                     {"adaptation_window_s", optional_or_null(r.adaptation_window_s)},
                     {"diverged", r.diverged},
                     {"divergence_time_s", optional_or_null(r.divergence_time_s)}};
  const fs::path js = output_file(cfg, "summary.json");
  write_json(js, summary);
  out << summary.dump() << "\n";
  out << "wrote " << csv.string() << ", " << js.string() << "\n";
  return kExitOk;
}

int cmd_montecarlo(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const MonteCarloStats stats = monte_carlo(cfg.scenario, cfg.runs, cfg.threads);
  json doc = stats_json(stats);
  doc["filter"] = to_string(cfg.scenario.filter);
  doc["base_seed"] = cfg.scenario.seed;
  doc["runs"] = cfg.runs;
  const fs::path path = output_file(cfg, "montecarlo.json");
  write_json(path, doc);
  out << "runs " << cfg.runs << ", mean rmse " << stats.mean_rmse_pct << " %, std "
      << stats.std_rmse_pct << " %, diverged " << stats.diverged_count << ", unbounded "
      << stats.unbounded_count << "\nwrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const auto rows =
      sensitivity_sweep(cfg.scenario, cfg.sweep.axis, cfg.sweep.values, cfg.runs, cfg.threads);
  json table = json::array();
  const fs::path csv = output_file(cfg, "sweep.csv");
  {
    std::ofstream f = open_output(csv);
    f << std::setprecision(cfg.precision);
    f << to_string(cfg.sweep.axis) << ",mean_error_pct,std_error_pct,mean_adaptation_s,diverged,unbounded\n";
    out << std::left << std::setw(10) << to_string(cfg.sweep.axis) << std::setw(16)
        << "mean error %" << std::setw(16) << "adaptation s" << "diverged\n";
    for (const auto& row : rows) {
      json entry = stats_json(row.stats);
      entry["value"] = row.value;
      table.push_back(std::move(entry));
      f << row.value << ',' << row.mean_error_pct << ',' << row.stats.std_rmse_pct << ',';
      if (row.mean_adaptation_s) f << *row.mean_adaptation_s;
      f << ',' << row.stats.diverged_count << ',' << row.stats.unbounded_count << '\n';
      out << std::setw(10) << row.value << std::setw(16) << row.mean_error_pct << std::setw(16)
          << (row.mean_adaptation_s ? std::to_string(*row.mean_adaptation_s) : "-")
          << row.stats.diverged_count << "\n";
    }
  }
  const json doc{{"axis", to_string(cfg.sweep.axis)},
                 {"filter", to_string(cfg.scenario.filter)},
                 {"runs", cfg.runs},
                 {"base_seed", cfg.scenario.seed},
                 {"rows", std::move(table)}};
  const fs::path js = output_file(cfg, "sweep.json");
  write_json(js, doc);
  out << "wrote " << csv.string() << ", " << js.string() << "\n";
  return kExitOk;
}

int cmd_observability(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const ObservabilitySettings& obs = cfg.observability;
  const Eigen::VectorXd state =
      obs.state.size() ? obs.state : default_observability_state(cfg.scenario);
  BilinearSystem sys = BilinearSystem::from_vehicle(cfg.scenario.vehicle);
  if (obs.measurement_rows) sys = sys.with_outputs(*obs.measurement_rows);
  const ObservabilityReport report = observability_report(sys, state, obs.input, obs.tolerance);

  out << "state:";
  for (Eigen::Index i = 0; i < state.size(); ++i) out << ' ' << state(i);
  out << "\nsingular values:";
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i) {
    out << ' ' << report.singular_values(i);
  }
  out << "\nrank " << report.rank << " of " << sys.state_dim() << "\n";
  if (report.outside_physical_regime) out << "warning: stiffness state is not positive\n";
  out << "verdict: " << (report.observable ? "observable" : "not observable") << "\n";
  return report.observable ? kExitOk : kExitNegative;
}

int cmd_gen_profile(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = prepare(o);
  const Scenario& sc = cfg.scenario;
  ProfileSpec spec = sc.profile;
  spec.seed = sc.seed;
  const ComposedPath path = compose_path(sc.path, spec, sc.velocity, sc.dt);
  const fs::path file = output_file(cfg, "profile.csv");
  write_profile_csv(file, path.profile, cfg.precision);
  out << "samples " << path.profile.size() << ", class " << to_string(spec.iso_class)
      << ", seed " << spec.seed << "\nwrote " << file.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soil stiffness estimation from quarter-car accelerations", "terrasense"};
  app.require_subcommand(1);
  Overrides o;

  const auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", o.config, "JSON scenario file")->required();
    return sub;
  };
  const auto seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Base seed, overrides the config");
  };
  const auto outdir = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory, overrides the config");
  };
  const auto filter = [&](CLI::App* sub) {
    sub->add_option("--filter", o.filter, "sckf or ekf");
  };
  const auto batch = [&](CLI::App* sub) {
    sub->add_option("--runs", o.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* simulate = add("simulate", "Write the truth trajectory and noisy accelerations");
  seed(simulate);
  outdir(simulate);
  CLI::App* estimate = add("estimate", "Run one filter and write timelines plus a summary");
  filter(estimate);
  seed(estimate);
  outdir(estimate);
  CLI::App* montecarlo = add("montecarlo", "Repeat the estimate over consecutive seeds");
  filter(montecarlo);
  batch(montecarlo);
  seed(montecarlo);
  outdir(montecarlo);
  CLI::App* sweep = add("sweep", "Monte Carlo batches across ISO classes or speeds");
  filter(sweep);
  batch(sweep);
  seed(sweep);
  outdir(sweep);
  CLI::App* observability = add("observability", "Lie-derivative rank test");
  CLI::App* gen_profile = add("gen-profile", "Write a synthetic road profile");
  seed(gen_profile);
  outdir(gen_profile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << "run 'terrasense --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (estimate->parsed()) return cmd_estimate(o, out);
    if (montecarlo->parsed()) return cmd_montecarlo(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (observability->parsed()) return cmd_observability(o, out);
    if (gen_profile->parsed()) return cmd_gen_profile(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNegative;
  }
  return kExitUsage;
}

}  // namespace terrasense::cli
