// Command-line front end: run scenarios, Monte Carlo studies, and parameter
// sweeps for the range-based localization-error monitor.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rangemon/errors.hpp"
#include "rangemon/harness.hpp"
#include "rangemon/scenario.hpp"

namespace fs = std::filesystem;
using namespace rangemon;

namespace {

struct Options {
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::string start_mode;
  std::string validate_path;
  double rho = 0.0;
  double omega_max = 0.0;
  double nu_max = 0.0;
  int steps = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool per_robot = false;
  std::vector<double> sweep_rhos;
  std::vector<double> sweep_omegas;

  CLI::Option* rho_opt = nullptr;
  CLI::Option* omega_opt = nullptr;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* start_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* per_robot_opt = nullptr;
};

void add_common_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "Built-in scenario name (see list-scenarios)");
  cmd->add_option("--config", o.config_path, "Scenario JSON file");
  const char* env_out = std::getenv("RANGEMON_OUT_DIR");
  o.out_dir = env_out ? env_out : "out";
  cmd->add_option("--out-dir", o.out_dir, "Artifact directory")->capture_default_str();
  o.rho_opt = cmd->add_option("--rho", o.rho, "Override the ADMM penalty rho");
  o.omega_opt = cmd->add_option("--omega-max", o.omega_max, "Override the range-noise bound");
  o.nu_opt = cmd->add_option("--nu-max", o.nu_max, "Override the estimation-noise bound");
  o.start_opt = cmd->add_option("--start-mode", o.start_mode,
                                "warm (duals carried across rounds) or cold (duals reset once "
                                "their norm passes the threshold 10)")
                    ->check(CLI::IsMember({"warm", "cold"}));
  o.steps_opt = cmd->add_option("--steps", o.steps, "Override the number of simulation steps");
  o.trials_opt = cmd->add_option("--trials", o.trials, "Override the Monte Carlo trial count");
  o.seed_opt = cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--threads", o.threads, "Worker threads for trial-level parallelism")
      ->capture_default_str();
  o.per_robot_opt =
      cmd->add_flag("--per-robot", o.per_robot, "Add per-robot rmse/chi columns to the CSV");
}

ScenarioConfig load_base(const Options& o) {
  if (!o.scenario.empty() && !o.config_path.empty())
    throw ConfigError("pass either --scenario or --config, not both");
  if (!o.scenario.empty()) return named_scenario(o.scenario);
  if (!o.config_path.empty()) return ScenarioConfig::load_file(o.config_path);
  throw ConfigError("a scenario is required: --scenario <name> or --config <file>");
}

nlohmann::json override_json(const Options& o) {
  nlohmann::json ov = nlohmann::json::object();
  if (*o.rho_opt) ov["solver"]["rho"] = o.rho;
  if (*o.omega_opt) ov["noise"]["omega_max"] = o.omega_max;
  if (*o.nu_opt) ov["noise"]["nu_max"] = o.nu_max;
  if (*o.start_opt) {
    ov["solver"]["warm_start"] = true;
    if (o.start_mode == "warm")
      ov["solver"]["dual_threshold"] = "inf";
    else
      ov["solver"]["dual_threshold"] = 10.0;
  }
  if (*o.steps_opt) ov["steps"] = o.steps;
  if (*o.trials_opt) ov["trials"] = o.trials;
  if (*o.seed_opt) ov["master_seed"] = o.seed;
  if (*o.per_robot_opt) ov["per_robot_columns"] = true;
  return ov;
}

ScenarioConfig load_with_overrides(const Options& o) {
  ScenarioConfig base = load_base(o);
  const nlohmann::json ov = override_json(o);
  return ov.empty() ? base : base.with_overrides(ov);
}

std::string artifact_stem(const std::string& name, const std::string& label) {
  return label.empty() ? name : name + "-" + label;
}

template <class F>
void parallel_for(int jobs, int threads, F&& fn) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// One trial per variant; CSVs named <scenario>[-<variant>]-trial.csv.
void cmd_run(const Options& o) {
  const ScenarioConfig base = load_with_overrides(o);
  std::vector<std::pair<std::string, ResolvedScenario>> jobs;
  for (const auto& [label, vcfg] : expand_variants(base)) jobs.emplace_back(label, resolve(vcfg, label));

  std::vector<TrialMetrics> metrics(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), o.threads, [&](int i) {
    metrics[static_cast<std::size_t>(i)] =
        run_trial(jobs[static_cast<std::size_t>(i)].second, base.master_seed);
  });

  fs::create_directories(o.out_dir);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& [label, scenario] = jobs[i];
    const TrialMetrics& m = metrics[i];
    const std::string stem = artifact_stem(base.name, label);
    write_trial_csv((fs::path(o.out_dir) / (stem + "-trial.csv")).string(), m,
                    scenario.cfg.per_robot_columns);
    write_json((fs::path(o.out_dir) / (stem + "-meta.json")).string(),
               run_metadata(scenario, 1));
    std::printf("%s final_mean_rmse=%.6g detected=%d diverged=%s\n", stem.c_str(),
                m.mean_rmse.empty() ? 0.0 : m.mean_rmse.back(),
                m.n_detected.empty() ? 0 : m.n_detected.back(), m.diverged ? "yes" : "no");
  }
}

void write_variant_artifacts(const Options& o, const ScenarioConfig& base,
                             const std::vector<VariantAggregate>& aggregates) {
  fs::create_directories(o.out_dir);
  const auto variants = expand_variants(base);
  nlohmann::ordered_json summary;
  summary["tool"] = "rangemon";
  summary["scenario"] = base.name;
  summary["variants"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    const VariantAggregate& a = aggregates[i];
    const ResolvedScenario scenario = resolve(variants[i].second, a.label);
    const std::string stem = artifact_stem(base.name, a.label);
    write_aggregate_csv((fs::path(o.out_dir) / (stem + ".csv")).string(), a,
                        scenario.cfg.per_robot_columns);
    write_json((fs::path(o.out_dir) / (stem + "-meta.json")).string(),
               run_metadata(scenario, scenario.cfg.trials));
    summary["variants"].push_back(a.summary_json());
    std::printf("%s final_mean_rmse=%.6g divergence_rate=%.2f precision=%.2f recall=%.2f "
                "diverged=%s\n",
                stem.c_str(), a.final_mean_rmse_all, a.divergence_rate, a.mean_precision,
                a.mean_recall, a.diverged_trials.empty() ? "no" : "yes");
  }
  write_json((fs::path(o.out_dir) / (base.name + "-summary.json")).string(), summary);
}

void cmd_monte_carlo(const Options& o) {
  const ScenarioConfig base = load_with_overrides(o);
  write_variant_artifacts(o, base, monte_carlo(base, o.threads));
}

void cmd_sweep(const Options& o) {
  ScenarioConfig base = load_with_overrides(o);
  const std::vector<double> rhos =
      o.sweep_rhos.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.25} : o.sweep_rhos;
  const std::vector<double> omegas =
      o.sweep_omegas.empty() ? std::vector<double>{0.02, 0.05} : o.sweep_omegas;
  base.variants.clear();
  for (double rho : rhos) {
    for (double omega : omegas) {
      char label[64];
      std::snprintf(label, sizeof label, "rho%g-omega%g", rho, omega);
      nlohmann::json ov;
      ov["solver"] = {{"rho", rho}};
      ov["noise"] = {{"omega_max", omega}};
      base.variants.push_back({label, std::move(ov)});
    }
  }
  write_variant_artifacts(o, base, monte_carlo(base, o.threads));
}

void cmd_list_scenarios() {
  for (const std::string& name : scenario_names()) {
    const ScenarioConfig cfg = named_scenario(name);
    std::printf("%-12s %s", name.c_str(), scenario_description(name).c_str());
    if (!cfg.variants.empty()) std::printf(" (%zu variants)", cfg.variants.size());
    std::printf("\n");
  }
}

void cmd_validate(const Options& o) {
  const ScenarioConfig cfg = ScenarioConfig::load_file(o.validate_path);
  for (const auto& [label, vcfg] : expand_variants(cfg)) resolve(vcfg, label);
  std::printf("ok: %s (%d robots, %d steps, %zu variant%s)\n", o.validate_path.c_str(),
              cfg.n_agents, cfg.steps, std::max<std::size_t>(cfg.variants.size(), 1),
              cfg.variants.size() == 1 ? "" : "s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstructs sparse localization errors in a robot swarm from inter-robot "
               "ranges and flags spoofed robots."};
  app.require_subcommand(1);

  Options run_o, mc_o, sweep_o, val_o;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one trial per scenario variant");
  add_common_options(run_cmd, run_o);
  CLI::App* mc_cmd = app.add_subcommand("monte-carlo", "Run all trials and aggregate curves");
  add_common_options(mc_cmd, mc_o);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Monte Carlo over a grid of rho and omega-max values");
  add_common_options(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--rho-grid", sweep_o.sweep_rhos, "Comma-separated rho values")
      ->delimiter(',');
  sweep_cmd->add_option("--omega-grid", sweep_o.sweep_omegas, "Comma-separated omega-max values")
      ->delimiter(',');
  CLI::App* list_cmd = app.add_subcommand("list-scenarios", "Show the built-in scenarios");
  CLI::App* val_cmd = app.add_subcommand("validate-config", "Check a scenario JSON file");
  val_cmd->add_option("file", val_o.validate_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
    if (*run_cmd) cmd_run(run_o);
    if (*mc_cmd) cmd_monte_carlo(mc_o);
    if (*sweep_cmd) cmd_sweep(sweep_o);
    if (*list_cmd) cmd_list_scenarios();
    if (*val_cmd) cmd_validate(val_o);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
