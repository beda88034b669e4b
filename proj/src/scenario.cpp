#include "rangemon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rangemon/errors.hpp"
#include "rangemon/rng.hpp"

namespace rangemon {
namespace {

constexpr double kPi = 3.14159265358979323846;

void check_keys(const nlohmann::json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

double get_num(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int get_int(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

// "inf" (string) or a positive number.
double parse_threshold(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError(where + ": expected a number or \"inf\"");
  }
  return get_num(j, where);
}

nlohmann::json threshold_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

nlohmann::json deep_merge(nlohmann::json base, const nlohmann::json& over) {
  if (!base.is_object() || !over.is_object()) return over;
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (base.contains(it.key()))
      base[it.key()] = deep_merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
  return base;
}

FormationSpec formation_from_json(const nlohmann::json& j) {
  check_keys(j, "formation", {"type", "box_size", "radius", "spacing"});
  FormationSpec f;
  if (j.contains("type")) f.type = j.at("type").get<std::string>();
  if (f.type != "random-box" && f.type != "circle" && f.type != "grid")
    throw ConfigError("formation.type: unknown type \"" + f.type + "\"");
  if (j.contains("box_size")) f.box_size = get_num(j.at("box_size"), "formation.box_size");
  if (j.contains("radius")) f.radius = get_num(j.at("radius"), "formation.radius");
  if (j.contains("spacing")) f.spacing = get_num(j.at("spacing"), "formation.spacing");
  return f;
}

TopologyPhaseSpec topology_phase_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, where, {"start_step", "type", "mean_degree", "edges"});
  TopologyPhaseSpec p;
  if (j.contains("start_step")) p.start_step = get_int(j.at("start_step"), where + ".start_step");
  if (j.contains("type")) p.type = j.at("type").get<std::string>();
  if (p.type != "geometric" && p.type != "explicit")
    throw ConfigError(where + ".type: unknown type \"" + p.type + "\"");
  if (j.contains("mean_degree"))
    p.mean_degree = get_num(j.at("mean_degree"), where + ".mean_degree");
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError(where + ".edges: each edge must be a pair [i, j]");
      p.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  return p;
}

TopologySpec topology_from_json(const nlohmann::json& j) {
  TopologySpec t;
  if (j.contains("phases")) {
    check_keys(j, "topology", {"phases"});
    t.phases.clear();
    int idx = 0;
    for (const auto& pj : j.at("phases"))
      t.phases.push_back(
          topology_phase_from_json(pj, "topology.phases[" + std::to_string(idx++) + "]"));
    if (t.phases.empty()) throw ConfigError("topology.phases: must not be empty");
  } else {
    t.phases = {topology_phase_from_json(j, "topology")};
  }
  return t;
}

NoiseConfig noise_from_json(const nlohmann::json& j) {
  check_keys(j, "noise", {"omega_max", "nu_max", "distribution", "w_bounds", "v_bounds"});
  NoiseConfig n;
  if (j.contains("omega_max")) n.omega_max = get_num(j.at("omega_max"), "noise.omega_max");
  if (j.contains("nu_max")) n.nu_max = get_num(j.at("nu_max"), "noise.nu_max");
  if (j.contains("distribution"))
    n.distribution = noise_distribution_from_string(j.at("distribution").get<std::string>());
  if (j.contains("w_bounds")) n.w_bounds = j.at("w_bounds").get<std::vector<double>>();
  if (j.contains("v_bounds")) n.v_bounds = j.at("v_bounds").get<std::vector<double>>();
  return n;
}

// epsilon accepts "auto"; dual_threshold accepts "inf".
SolverConfig solver_from_json(const nlohmann::json& j, bool* epsilon_auto) {
  check_keys(j, "solver",
             {"rho", "n_admm", "scp_rounds_per_step", "epsilon", "dual_threshold", "warm_start",
              "prox_tol", "max_prox_iter", "delta_min"});
  SolverConfig s;
  if (j.contains("rho")) s.rho = get_num(j.at("rho"), "solver.rho");
  if (j.contains("n_admm")) s.n_admm = get_int(j.at("n_admm"), "solver.n_admm");
  if (j.contains("scp_rounds_per_step"))
    s.scp_rounds_per_step = get_int(j.at("scp_rounds_per_step"), "solver.scp_rounds_per_step");
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto")
        throw ConfigError("solver.epsilon: expected a number or \"auto\"");
      *epsilon_auto = true;
    } else {
      s.epsilon = get_num(e, "solver.epsilon");
      *epsilon_auto = false;
    }
  }
  if (j.contains("dual_threshold"))
    s.dual_threshold = parse_threshold(j.at("dual_threshold"), "solver.dual_threshold");
  if (j.contains("warm_start")) {
    if (!j.at("warm_start").is_boolean()) throw ConfigError("solver.warm_start: expected a bool");
    s.warm_start = j.at("warm_start").get<bool>();
  }
  if (j.contains("prox_tol")) s.prox_tol = get_num(j.at("prox_tol"), "solver.prox_tol");
  if (j.contains("max_prox_iter"))
    s.max_prox_iter = get_int(j.at("max_prox_iter"), "solver.max_prox_iter");
  if (j.contains("delta_min")) s.delta_min = get_num(j.at("delta_min"), "solver.delta_min");
  return s;
}

AttackSpec attack_from_json(const nlohmann::json& j) {
  check_keys(j, "attack", {"offset_magnitude", "phases"});
  AttackSpec a;
  if (j.contains("offset_magnitude"))
    a.offset_magnitude = get_num(j.at("offset_magnitude"), "attack.offset_magnitude");
  if (j.contains("phases")) {
    int idx = 0;
    for (const auto& pj : j.at("phases")) {
      const std::string where = "attack.phases[" + std::to_string(idx++) + "]";
      check_keys(pj, where, {"start_step", "end_step", "targets", "offsets"});
      AttackPhaseSpec p;
      if (!pj.contains("start_step") || !pj.contains("end_step") || !pj.contains("targets"))
        throw ConfigError(where + ": start_step, end_step and targets are required");
      p.start_step = get_int(pj.at("start_step"), where + ".start_step");
      p.end_step = get_int(pj.at("end_step"), where + ".end_step");
      p.targets = pj.at("targets").get<std::vector<int>>();
      if (pj.contains("offsets") && !pj.at("offsets").is_null()) {
        for (const auto& oj : pj.at("offsets")) {
          auto vals = oj.get<std::vector<double>>();
          p.offsets.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                                static_cast<int>(vals.size())));
        }
        if (p.offsets.size() != p.targets.size())
          throw ConfigError(where + ": offsets must match targets one-to-one");
      }
      a.phases.push_back(std::move(p));
    }
  }
  return a;
}

nlohmann::ordered_json formation_to_json(const FormationSpec& f) {
  nlohmann::ordered_json j;
  j["type"] = f.type;
  j["box_size"] = f.box_size;
  j["radius"] = f.radius;
  j["spacing"] = f.spacing;
  return j;
}

nlohmann::ordered_json topology_to_json(const TopologySpec& t) {
  nlohmann::ordered_json j;
  j["phases"] = nlohmann::ordered_json::array();
  for (const auto& p : t.phases) {
    nlohmann::ordered_json pj;
    pj["start_step"] = p.start_step;
    pj["type"] = p.type;
    pj["mean_degree"] = p.mean_degree;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [a, b] : p.edges) edges.push_back({a, b});
    pj["edges"] = edges;
    j["phases"].push_back(pj);
  }
  return j;
}

nlohmann::ordered_json noise_to_json(const NoiseConfig& n) {
  nlohmann::ordered_json j;
  j["omega_max"] = n.omega_max;
  j["nu_max"] = n.nu_max;
  j["distribution"] = to_string(n.distribution);
  j["w_bounds"] = n.w_bounds;
  j["v_bounds"] = n.v_bounds;
  return j;
}

nlohmann::ordered_json solver_to_json(const SolverConfig& s, bool epsilon_auto) {
  nlohmann::ordered_json j;
  j["rho"] = s.rho;
  j["n_admm"] = s.n_admm;
  j["scp_rounds_per_step"] = s.scp_rounds_per_step;
  if (epsilon_auto)
    j["epsilon"] = "auto";
  else
    j["epsilon"] = s.epsilon;
  j["dual_threshold"] = threshold_to_json(s.dual_threshold);
  j["warm_start"] = s.warm_start;
  j["prox_tol"] = s.prox_tol;
  j["max_prox_iter"] = s.max_prox_iter;
  j["delta_min"] = s.delta_min;
  return j;
}

nlohmann::ordered_json attack_to_json(const AttackSpec& a) {
  nlohmann::ordered_json j;
  j["offset_magnitude"] = a.offset_magnitude;
  j["phases"] = nlohmann::ordered_json::array();
  for (const auto& p : a.phases) {
    nlohmann::ordered_json pj;
    pj["start_step"] = p.start_step;
    pj["end_step"] = p.end_step;
    pj["targets"] = p.targets;
    if (p.offsets.empty()) {
      pj["offsets"] = nullptr;
    } else {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& o : p.offsets)
        arr.push_back(std::vector<double>(o.data(), o.data() + o.size()));
      pj["offsets"] = arr;
    }
    j["phases"].push_back(pj);
  }
  return j;
}

Eigen::MatrixXd build_formation(const ScenarioConfig& cfg) {
  const int n = cfg.n_agents;
  const int d = cfg.dimension;
  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(d, n);
  if (cfg.formation.type == "random-box") {
    RngStream rng(cfg.master_seed, 0xfffffffdu, "topology");
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < d; ++a) pos(a, i) = rng.uniform(0.0, cfg.formation.box_size);
  } else if (cfg.formation.type == "circle") {
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * kPi * i / n;
      pos(0, i) = cfg.formation.radius * std::cos(th);
      pos(1, i) = cfg.formation.radius * std::sin(th);
    }
  } else {  // grid
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    for (int i = 0; i < n; ++i) {
      pos(0, i) = cfg.formation.spacing * (i % cols);
      pos(1, i) = cfg.formation.spacing * (i / cols);
    }
  }
  return pos;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_agents < 2) throw ConfigError("n_agents must be at least 2");
  if (dimension != 2 && dimension != 3) throw ConfigError("dimension must be 2 or 3");
  if (steps < 1) throw ConfigError("steps must be positive");
  if (trials < 1) throw ConfigError("trials must be positive");
  if (dynamics_dt <= 0) throw ConfigError("dynamics_dt must be positive");
  if (formation.box_size <= 0 || formation.radius <= 0 || formation.spacing <= 0)
    throw ConfigError("formation sizes must be positive");
  noise.validate();
  solver.validate();
  if (detection.confirm_steps < 1) throw ConfigError("detection.confirm_steps must be >= 1");
  if (attack.offset_magnitude <= 0) throw ConfigError("attack.offset_magnitude must be positive");
  if (topology.phases.empty()) throw ConfigError("topology needs at least one phase");
  if (topology.phases.front().start_step != 0)
    throw ConfigError("the first topology phase must start at step 0");
  for (std::size_t i = 1; i < topology.phases.size(); ++i)
    if (topology.phases[i].start_step <= topology.phases[i - 1].start_step)
      throw ConfigError("topology phase starts must be strictly increasing");
  for (const auto& p : topology.phases) {
    if (p.type == "geometric" && p.mean_degree <= 0)
      throw ConfigError("topology mean_degree must be positive");
    if (p.type == "explicit" && p.edges.empty())
      throw ConfigError("an explicit topology phase needs edges");
  }
  for (const auto& p : attack.phases) {
    if (!p.offsets.empty())
      for (const auto& o : p.offsets)
        if (o.size() != dimension)
          throw ConfigError("attack offsets must have one entry per position axis");
  }
  std::set<std::string> labels;
  for (const auto& v : variants) {
    if (v.label.empty()) throw ConfigError("variant labels must not be empty");
    if (!labels.insert(v.label).second)
      throw ConfigError("duplicate variant label \"" + v.label + "\"");
  }
  if (epsilon_auto && noise.nu_max + noise.omega_max <= 0)
    throw ConfigError(
        "epsilon is \"auto\" but nu_max + omega_max is zero; set solver.epsilon explicitly");
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["n_agents"] = n_agents;
  j["dimension"] = dimension;
  j["mode"] = to_string(mode);
  j["steps"] = steps;
  j["trials"] = trials;
  j["master_seed"] = master_seed;
  j["formation"] = formation_to_json(formation);
  j["topology"] = topology_to_json(topology);
  j["noise"] = noise_to_json(noise);
  j["solver"] = solver_to_json(solver, epsilon_auto);
  j["detection"] = {{"confirm_steps", detection.confirm_steps}};
  j["attack"] = attack_to_json(attack);
  j["dynamics_dt"] = dynamics_dt;
  j["per_robot_columns"] = per_robot_columns;
  auto vars = nlohmann::ordered_json::array();
  for (const auto& v : variants) vars.push_back({{"label", v.label}, {"overrides", v.overrides}});
  j["variants"] = vars;
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  check_keys(j, "scenario",
             {"name", "n_agents", "dimension", "mode", "steps", "trials", "master_seed",
              "formation", "topology", "noise", "solver", "detection", "attack", "dynamics_dt",
              "per_robot_columns", "variants"});
  ScenarioConfig c;
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  if (j.contains("n_agents")) c.n_agents = get_int(j.at("n_agents"), "n_agents");
  if (j.contains("dimension")) c.dimension = get_int(j.at("dimension"), "dimension");
  if (j.contains("mode")) c.mode = sim_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("steps")) c.steps = get_int(j.at("steps"), "steps");
  if (j.contains("trials")) c.trials = get_int(j.at("trials"), "trials");
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("formation")) c.formation = formation_from_json(j.at("formation"));
  if (j.contains("topology")) c.topology = topology_from_json(j.at("topology"));
  if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
  if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"), &c.epsilon_auto);
  if (j.contains("detection")) {
    check_keys(j.at("detection"), "detection", {"confirm_steps"});
    if (j.at("detection").contains("confirm_steps"))
      c.detection.confirm_steps =
          get_int(j.at("detection").at("confirm_steps"), "detection.confirm_steps");
  }
  if (j.contains("attack")) c.attack = attack_from_json(j.at("attack"));
  if (j.contains("dynamics_dt")) c.dynamics_dt = get_num(j.at("dynamics_dt"), "dynamics_dt");
  if (j.contains("per_robot_columns")) {
    if (!j.at("per_robot_columns").is_boolean())
      throw ConfigError("per_robot_columns: expected a bool");
    c.per_robot_columns = j.at("per_robot_columns").get<bool>();
  }
  if (j.contains("variants")) {
    for (const auto& vj : j.at("variants")) {
      check_keys(vj, "variants[]", {"label", "overrides"});
      if (!vj.contains("label")) throw ConfigError("variants[]: label is required");
      Variant v;
      v.label = vj.at("label").get<std::string>();
      v.overrides = vj.contains("overrides") ? vj.at("overrides") : nlohmann::json::object();
      if (v.overrides.contains("variants"))
        throw ConfigError("variant overrides must not nest variants");
      c.variants.push_back(std::move(v));
    }
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

ScenarioConfig ScenarioConfig::with_overrides(const nlohmann::json& overrides) const {
  return from_json(deep_merge(to_json(), overrides));
}

std::vector<std::pair<std::string, ScenarioConfig>> expand_variants(const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, ScenarioConfig>> out;
  if (cfg.variants.empty()) {
    ScenarioConfig base = cfg;
    out.emplace_back("", std::move(base));
    return out;
  }
  for (const auto& v : cfg.variants) {
    ScenarioConfig merged = cfg.with_overrides(v.overrides);
    merged.name = cfg.name;
    merged.variants.clear();
    out.emplace_back(v.label, std::move(merged));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

namespace {

ScenarioConfig base_kinematic() {
  ScenarioConfig c;
  c.n_agents = 20;
  c.dimension = 2;
  c.mode = SimMode::kKinematic;
  c.steps = 120;
  c.trials = 20;
  c.master_seed = 1;
  c.formation.type = "random-box";
  c.formation.box_size = 5.0;
  c.topology.phases[0].type = "geometric";
  c.topology.phases[0].mean_degree = 6.0;
  c.noise.nu_max = 0.02;
  c.noise.omega_max = 0.02;
  c.solver.n_admm = 10;
  c.solver.scp_rounds_per_step = 1;
  c.solver.warm_start = true;
  c.epsilon_auto = true;
  c.detection.confirm_steps = 3;
  return c;
}

AttackPhaseSpec phase(int start, int end, std::vector<int> targets) {
  AttackPhaseSpec p;
  p.start_step = start;
  p.end_step = end;
  p.targets = std::move(targets);
  return p;
}

ScenarioConfig noise_scenario(const std::string& name, double rho, double omega) {
  ScenarioConfig c = base_kinematic();
  c.name = name;
  c.solver.rho = rho;
  c.solver.dual_threshold = std::numeric_limits<double>::infinity();
  c.noise.omega_max = omega;
  c.attack.phases = {phase(10, 120, {0, 3, 7, 11, 15, 19})};
  return c;
}

nlohmann::json solver_override(double rho, double dual_threshold) {
  nlohmann::json s;
  s["rho"] = rho;
  s["dual_threshold"] = threshold_to_json(dual_threshold);
  return nlohmann::json{{"solver", s}};
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"noise-i", "noise-ii", "noise-iii", "noise-iv", "two-phase",
          "rho-sweep", "mr7",      "attack-free"};
}

std::string scenario_description(const std::string& name) {
  if (name == "noise-i") return "20 robots, 6 spoofed; rho=0.25, range noise 0.02";
  if (name == "noise-ii") return "20 robots, 6 spoofed; rho=0.25, range noise 0.05";
  if (name == "noise-iii") return "20 robots, 6 spoofed; rho=1.25, range noise 0.02";
  if (name == "noise-iv") return "20 robots, 6 spoofed; rho=1.25, range noise 0.05";
  if (name == "two-phase")
    return "attacked set switches mid-run; warm vs adaptive-reset starts at rho 0.25/0.75";
  if (name == "rho-sweep") return "penalty sweep rho in {0.25..1.25} x range noise {0.02, 0.05}";
  if (name == "mr7") return "7 robots in 3-D, 2 spoofed, adaptive dual reset";
  if (name == "attack-free") return "no spoofing; false-alarm check over long runs";
  throw ConfigError("unknown scenario \"" + name + "\"");
}

ScenarioConfig named_scenario(const std::string& name) {
  const double inf = std::numeric_limits<double>::infinity();
  if (name == "noise-i") return noise_scenario(name, 0.25, 0.02);
  if (name == "noise-ii") return noise_scenario(name, 0.25, 0.05);
  if (name == "noise-iii") return noise_scenario(name, 1.25, 0.02);
  if (name == "noise-iv") return noise_scenario(name, 1.25, 0.05);
  if (name == "two-phase") {
    ScenarioConfig c = base_kinematic();
    c.name = name;
    // Tighter box and many relinearization rounds per step: accumulated dual
    // momentum from phase 1 destabilizes high-rho warm starts at the switch.
    c.steps = 80;
    c.formation.box_size = 4.0;
    c.solver.scp_rounds_per_step = 100;
    c.attack.phases = {phase(10, 40, {2, 9, 16}), phase(40, 80, {5, 12, 19})};
    c.variants = {{"rho0.25-warm", solver_override(0.25, inf)},
                  {"rho0.25-cold", solver_override(0.25, 10.0)},
                  {"rho0.75-warm", solver_override(0.75, inf)},
                  {"rho0.75-cold", solver_override(0.75, 10.0)}};
    return c;
  }
  if (name == "rho-sweep") {
    ScenarioConfig c = base_kinematic();
    c.name = name;
    c.attack.phases = {phase(10, 120, {0, 3, 7, 11, 15, 19})};
    for (double rho : {0.25, 0.5, 0.75, 1.0, 1.25}) {
      for (double omega : {0.02, 0.05}) {
        char label[64];
        std::snprintf(label, sizeof label, "rho%.2f-omega%.2f", rho, omega);
        nlohmann::json ov = solver_override(rho, inf);
        ov["noise"] = {{"omega_max", omega}};
        c.variants.push_back({label, std::move(ov)});
      }
    }
    return c;
  }
  if (name == "mr7") {
    ScenarioConfig c = base_kinematic();
    c.name = name;
    c.n_agents = 7;
    c.dimension = 3;
    c.formation.type = "circle";
    c.formation.radius = 2.0;
    c.topology.phases[0].mean_degree = 4.0;
    c.solver.rho = 0.25;
    c.solver.dual_threshold = 10.0;
    c.attack.phases = {phase(10, 120, {2, 5})};
    return c;
  }
  if (name == "attack-free") {
    ScenarioConfig c = base_kinematic();
    c.name = name;
    c.steps = 200;
    c.trials = 100;
    c.solver.rho = 0.25;
    c.solver.dual_threshold = 10.0;
    c.attack.phases.clear();
    return c;
  }
  throw ConfigError("unknown scenario \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Resolution

ResolvedScenario resolve(const ScenarioConfig& cfg_in, const std::string& variant_label) {
  ScenarioConfig cfg = cfg_in;
  cfg.variants.clear();
  cfg.validate();

  const Eigen::MatrixXd formation = build_formation(cfg);

  double radius_used = 0.0;
  std::vector<std::pair<int, SwarmGraph>> phases;
  for (const auto& ph : cfg.topology.phases) {
    if (ph.type == "geometric") {
      const double r = radius_for_mean_degree(formation, ph.mean_degree);
      double actual = 0.0;
      SwarmGraph g = geometric_graph(formation, r, &actual);
      if (phases.empty()) radius_used = actual;
      phases.emplace_back(ph.start_step, std::move(g));
    } else {
      phases.emplace_back(ph.start_step, SwarmGraph(cfg.n_agents, ph.edges));
    }
  }
  TopologySchedule schedule(std::move(phases));

  // Offsets left unspecified get a deterministic horizontal direction drawn
  // from the master seed, scaled to offset_magnitude.
  std::vector<AttackPhase> attack_phases;
  RngStream offset_rng(cfg.master_seed, 0xfffffffcu, "attack-offset");
  for (auto& sp : cfg.attack.phases) {
    AttackPhase p;
    p.start_step = sp.start_step;
    p.end_step = sp.end_step;
    p.targets = sp.targets;
    if (!sp.offsets.empty()) {
      p.offsets = sp.offsets;
    } else {
      for (std::size_t t = 0; t < sp.targets.size(); ++t) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(cfg.dimension);
        dir.head(2) = offset_rng.unit_vector(2);
        p.offsets.push_back(cfg.attack.offset_magnitude * dir);
      }
      sp.offsets = p.offsets;  // record the drawn offsets in the metadata copy
    }
    attack_phases.push_back(std::move(p));
  }
  AttackSchedule attacks(std::move(attack_phases), cfg.n_agents);

  double epsilon = cfg.solver.epsilon;
  if (cfg.epsilon_auto) {
    epsilon = 5.0 * (cfg.noise.nu_max + cfg.noise.omega_max);
    cfg.solver.epsilon = epsilon;
    cfg.epsilon_auto = false;  // metadata records the resolved value
  }
  if (epsilon <= 0) throw ConfigError("resolved epsilon must be positive");

  AgentModel model;
  int block_dim = cfg.dimension;
  if (cfg.mode == SimMode::kDynamics) {
    model = AgentModel::double_integrator(cfg.dimension, cfg.dynamics_dt);
    block_dim = model.state_dim();
  }
  LayoutPtr layout = BlockLayout::uniform(cfg.n_agents, block_dim);

  return ResolvedScenario{std::move(cfg),   variant_label, std::move(schedule),
                          formation,        std::move(model), std::move(attacks),
                          std::move(layout), cfg_in.dimension, epsilon,
                          radius_used};
}

nlohmann::ordered_json ResolvedScenario::metadata() const {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.to_json();
  if (!variant_label.empty()) j["variant"] = variant_label;
  j["epsilon"] = epsilon;
  j["graph"] = schedule.phases().front().second.to_json();
  if (schedule.phases().size() > 1) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [start, g] : schedule.phases())
      arr.push_back({{"start_step", start}, {"graph", g.to_json()}});
    j["topology_phases"] = arr;
  }
  if (geometric_radius > 0) j["geometric_radius"] = geometric_radius;
  j["attack"] = attacks.to_json();
  auto warn = nlohmann::ordered_json::array();
  for (const auto& w : attacks.warnings()) warn.push_back(w);
  j["warnings"] = warn;
  std::vector<double> flat(formation.data(), formation.data() + formation.size());
  j["formation_column_major"] = flat;
  j["formation_rows"] = formation.rows();
  return j;
}

}  // namespace rangemon
