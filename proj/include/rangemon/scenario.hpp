#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rangemon/attack.hpp"
#include "rangemon/measurement.hpp"
#include "rangemon/sim_world.hpp"
#include "rangemon/solver.hpp"
#include "rangemon/topology.hpp"

namespace rangemon {

struct FormationSpec {
  std::string type = "random-box";  // random-box | circle | grid
  double box_size = 5.0;            // random-box
  double radius = 2.0;              // circle
  double spacing = 1.0;             // grid
};

struct TopologyPhaseSpec {
  int start_step = 0;
  std::string type = "geometric";  // geometric | explicit
  double mean_degree = 6.0;
  std::vector<std::pair<int, int>> edges;  // explicit
};

struct TopologySpec {
  std::vector<TopologyPhaseSpec> phases;  // one phase = static topology
  TopologySpec() : phases(1) {}
};

struct DetectionSpec {
  int confirm_steps = 3;
};

struct AttackPhaseSpec {
  int start_step = 0;
  int end_step = 0;
  std::vector<int> targets;
  std::vector<Eigen::VectorXd> offsets;  // empty: drawn at resolve time
};

struct AttackSpec {
  std::vector<AttackPhaseSpec> phases;
  // Magnitude of generated offsets (seeded random horizontal direction).
  double offset_magnitude = 1.0;
};

// Everything needed to reproduce an experiment. Loaded from JSON, fully
// serialized back out (defaults included) into every run's metadata.
struct ScenarioConfig {
  std::string name = "custom";
  int n_agents = 20;
  int dimension = 2;
  SimMode mode = SimMode::kKinematic;
  int steps = 120;
  int trials = 20;
  std::uint64_t master_seed = 1;
  FormationSpec formation;
  TopologySpec topology;
  NoiseConfig noise;
  SolverConfig solver;
  bool epsilon_auto = true;  // epsilon := 5 (nu_max + omega_max) at resolve time
  DetectionSpec detection;
  AttackSpec attack;
  double dynamics_dt = 0.1;
  bool per_robot_columns = false;

  struct Variant {
    std::string label;
    nlohmann::json overrides;
  };
  std::vector<Variant> variants;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load_file(const std::string& path);
  // Deep-merges `overrides` (objects merge, scalars/arrays replace).
  ScenarioConfig with_overrides(const nlohmann::json& overrides) const;
};

// Built-in experiment presets.
std::vector<std::string> scenario_names();
std::string scenario_description(const std::string& name);
ScenarioConfig named_scenario(const std::string& name);

// (label, single-variant config) pairs; one entry labeled "" when the
// scenario has no variants.
std::vector<std::pair<std::string, ScenarioConfig>> expand_variants(const ScenarioConfig& cfg);

// Scenario with all randomness that defines the experiment itself (graph,
// formation, attack directions) already drawn from the master seed; trials
// differ only in their noise streams.
struct ResolvedScenario {
  ScenarioConfig cfg;  // variants cleared
  std::string variant_label;
  TopologySchedule schedule;
  Eigen::MatrixXd formation;  // dimension x n_agents
  AgentModel model;           // meaningful in dynamics mode only
  AttackSchedule attacks;
  LayoutPtr layout;
  int pos_dim = 2;
  double epsilon = 0.0;
  double geometric_radius = 0.0;  // 0 when the topology is explicit

  nlohmann::ordered_json metadata() const;
};

ResolvedScenario resolve(const ScenarioConfig& cfg, const std::string& variant_label = "");

}  // namespace rangemon
