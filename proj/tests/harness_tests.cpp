#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rangemon/errors.hpp"
#include "rangemon/harness.hpp"
#include "test_support.hpp"

using namespace rangemon;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast scenario: 8 robots, short horizon, one sustained attack.
ScenarioConfig small_attacked() {
  ScenarioConfig cfg;
  cfg.name = "unit";
  cfg.n_agents = 8;
  cfg.steps = 30;
  cfg.trials = 2;
  cfg.master_seed = 7;
  cfg.formation.box_size = 5.0;
  cfg.noise.nu_max = 0.02;
  cfg.noise.omega_max = 0.02;
  cfg.solver.rho = 0.25;
  cfg.solver.dual_threshold = 10.0;
  cfg.attack.phases.push_back({5, 30, {1, 6}, {}});
  cfg.attack.offset_magnitude = 1.0;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("reconstruction error is the per-robot difference norm") {
  auto layout = BlockLayout::uniform(3, 2);
  BlockVec truth(layout), recon(layout);
  truth.block(0) << 1.0, 0.0;
  truth.block(2) << 0.0, 2.0;
  recon.block(0) << 1.0, 0.0;  // exact
  recon.block(2) << 3.0, 6.0;  // off by (3, 4)
  Eigen::VectorXd err = reconstruction_error(truth, recon);
  REQUIRE(err.size() == 3);
  CHECK(err[0] == 0.0);
  CHECK(err[1] == 0.0);
  CHECK(err[2] == doctest::Approx(5.0));
  BlockVec other(BlockLayout::uniform(2, 2));
  CHECK_THROWS_AS(reconstruction_error(truth, other), ShapeError);
}

TEST_CASE("attack-free trials stay quiet") {
  ScenarioConfig cfg = small_attacked();
  cfg.attack.phases.clear();
  cfg.steps = 40;
  ResolvedScenario r = resolve(cfg);
  TrialMetrics m = run_trial(r, 123);
  CHECK(m.steps == 40);
  CHECK_FALSE(m.diverged);
  CHECK(m.first_injection_norm == 0.0);
  for (int k = 0; k < m.steps; ++k) {
    REQUIRE(m.chi[k] < r.epsilon);
    REQUIRE_FALSE(m.swarm_alarm[k]);
    REQUIRE(m.confirmed[k].empty());
    REQUIRE(m.attacked[k].empty());
  }
  CHECK(m.final_precision() == 1.0);  // empty/empty convention
  CHECK(m.final_recall() == 1.0);
}

TEST_CASE("a sustained attack is found and localized") {
  ScenarioConfig cfg = small_attacked();
  ResolvedScenario r = resolve(cfg);
  TrialMetrics m = run_trial(r, 3);
  CHECK_FALSE(m.diverged);
  CHECK(m.first_injection_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  // Ground-truth bookkeeping follows the schedule.
  CHECK(m.attacked[4].empty());
  CHECK(m.attacked[5] == std::set<int>{1, 6});
  CHECK(m.attacked[29] == std::set<int>{1, 6});
  // By the last step both spoofed robots are confirmed and nothing else is.
  CHECK(m.confirmed.back() == std::set<int>{1, 6});
  CHECK(m.final_precision() == 1.0);
  CHECK(m.final_recall() == 1.0);
  // Latency is recorded for every ever-attacked robot.
  REQUIRE(m.detection_latency.count(1));
  REQUIRE(m.detection_latency.count(6));
  CHECK(m.detection_latency.at(1) >= 0);
  CHECK(m.detection_latency.at(1) <= 10);
  // Reconstruction puts the error where the attack is.
  const int last = m.steps - 1;
  CHECK(m.robot_rmse(1, last) <= 0.12);
  CHECK(m.robot_rmse(6, last) <= 0.12);
  CHECK(m.mean_rmse[last] <= 0.12);
}

TEST_CASE("trials are deterministic in the seed") {
  ResolvedScenario r = resolve(small_attacked());
  TrialMetrics a = run_trial(r, 11);
  TrialMetrics b = run_trial(r, 11);
  TrialMetrics c = run_trial(r, 12);
  REQUIRE(a.steps == b.steps);
  for (int k = 0; k < a.steps; ++k) {
    REQUIRE(a.mean_rmse[k] == b.mean_rmse[k]);
    REQUIRE(a.chi[k] == b.chi[k]);
  }
  bool any_diff = false;
  for (int k = 0; k < a.steps; ++k) any_diff = any_diff || a.mean_rmse[k] != c.mean_rmse[k];
  CHECK(any_diff);
}

TEST_CASE("monte carlo aggregates per-trial metrics") {
  ScenarioConfig cfg = small_attacked();
  auto aggregates = monte_carlo(cfg, 1);
  REQUIRE(aggregates.size() == 1);
  const VariantAggregate& a = aggregates[0];
  CHECK(a.trials == 2);
  CHECK(a.steps == cfg.steps);
  CHECK(a.n_robots == 8);
  CHECK(a.divergence_rate == 0.0);
  CHECK(a.diverged_trials.empty());
  REQUIRE(a.mean_rmse.size() == static_cast<std::size_t>(cfg.steps));
  REQUIRE(a.trial_final_mean_rmse.size() == 2);

  // Trial t uses seed master_seed + t; rebuild trial 0 by hand.
  ResolvedScenario r = resolve(cfg);
  TrialMetrics t0 = run_trial(r, cfg.master_seed + 0);
  CHECK(a.trial_final_mean_rmse[0] == t0.mean_rmse.back());
  TrialMetrics t1 = run_trial(r, cfg.master_seed + 1);
  CHECK(a.mean_rmse.back() ==
        doctest::Approx(0.5 * (t0.mean_rmse.back() + t1.mean_rmse.back())).epsilon(1e-15));

  // The hand-rolled aggregation matches.
  VariantAggregate manual = aggregate_trials("", r, {t0, t1});
  CHECK(manual.mean_rmse.back() == a.mean_rmse.back());
  CHECK(manual.final_mean_rmse_all == a.final_mean_rmse_all);
}

TEST_CASE("monte carlo worker threads do not change aggregates") {
  ScenarioConfig cfg = small_attacked();
  cfg.trials = 3;
  auto seq = monte_carlo(cfg, 1);
  auto par = monte_carlo(cfg, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t v = 0; v < seq.size(); ++v) {
    REQUIRE(seq[v].trial_final_mean_rmse.size() == par[v].trial_final_mean_rmse.size());
    for (std::size_t t = 0; t < seq[v].trial_final_mean_rmse.size(); ++t)
      REQUIRE(seq[v].trial_final_mean_rmse[t] == par[v].trial_final_mean_rmse[t]);
    for (int k = 0; k < seq[v].steps; ++k) REQUIRE(seq[v].mean_rmse[k] == par[v].mean_rmse[k]);
  }
}

TEST_CASE("variant list produces one aggregate per label") {
  ScenarioConfig cfg = small_attacked();
  cfg.trials = 1;
  cfg.steps = 15;
  cfg.variants = {{"a", {{"solver", {{"rho", 0.25}}}}}, {"b", {{"solver", {{"rho", 0.75}}}}}};
  auto aggregates = monte_carlo(cfg, 1);
  REQUIRE(aggregates.size() == 2);
  CHECK(aggregates[0].label == "a");
  CHECK(aggregates[1].label == "b");
}

TEST_CASE("double formatting round-trips exactly") {
  RngStream rng(99);
  for (int t = 0; t < 2000; ++t) {
    double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
}

TEST_CASE("csv export is rectangular and byte-stable") {
  ScenarioConfig cfg = small_attacked();
  cfg.steps = 10;
  ResolvedScenario r = resolve(cfg);
  TrialMetrics m = run_trial(r, 5);
  const std::string p1 = "/tmp/rangemon_test_trial1.csv";
  const std::string p2 = "/tmp/rangemon_test_trial2.csv";
  write_trial_csv(p1, m, false);
  write_trial_csv(p2, m, false);
  const std::string body = slurp(p1);
  CHECK(body == slurp(p2));
  // Header + one row per step.
  int lines = 0;
  for (char ch : body) lines += ch == '\n';
  CHECK(lines == 1 + m.steps);
  CHECK(body.rfind("step,", 0) == 0);

  write_trial_csv(p1, m, true);
  const std::string wide = slurp(p1);
  CHECK(wide.find("rmse_0") != std::string::npos);
  CHECK(wide.find("chi_7") != std::string::npos);

  VariantAggregate agg = aggregate_trials("x", r, {m});
  write_aggregate_csv(p1, agg, false);
  const std::string abody = slurp(p1);
  int alines = 0;
  for (char ch : abody) alines += ch == '\n';
  CHECK(alines == 1 + agg.steps);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("summary json is machine-independent") {
  ScenarioConfig cfg = small_attacked();
  cfg.steps = 10;
  cfg.trials = 1;
  auto a = monte_carlo(cfg, 1);
  auto b = monte_carlo(cfg, 3);
  CHECK(a[0].summary_json() == b[0].summary_json());
  const auto j = a[0].summary_json();
  CHECK(j.contains("divergence_rate"));
  CHECK_FALSE(j.dump().find("seconds") != std::string::npos);
}

TEST_CASE("run metadata records the reproducibility surface") {
  ScenarioConfig cfg = small_attacked();
  ResolvedScenario r = resolve(cfg);
  const auto meta = run_metadata(r, cfg.trials);
  CHECK(meta.contains("scenario"));
  CHECK(meta.contains("graph"));
  CHECK(meta.contains("attack"));
  CHECK(meta["trials"] == 2);
  const std::string dumped = meta.dump();
  CHECK(dumped.find("seconds") == std::string::npos);
  CHECK(dumped.find("threads") == std::string::npos);
}

}  // TEST_SUITE
