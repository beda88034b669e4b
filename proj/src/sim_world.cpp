#include "rangemon/sim_world.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rangemon/errors.hpp"

namespace rangemon {

Eigen::VectorXd AgentModel::reference(int k) const {
  if (u_r) return u_r(k);
  return Eigen::VectorXd::Zero(input_dim());
}

double AgentModel::estimator_spectral_radius() const {
  const Eigen::MatrixXd closed = A - L_o * C;
  return closed.eigenvalues().cwiseAbs().maxCoeff();
}

void AgentModel::validate() const {
  const int n = state_dim();
  const int q = output_dim();
  auto expect = [](const Eigen::MatrixXd& m, int rows, const char* name) {
    if (m.rows() != rows)
      throw ConfigError(std::string("AgentModel: ") + name + " has " + std::to_string(m.rows()) +
                        " rows, expected " + std::to_string(rows));
  };
  if (n < 1) throw ConfigError("AgentModel: A must be a nonempty square matrix");
  if (A.rows() != A.cols()) throw ConfigError("AgentModel: A must be square");
  expect(B, n, "B");
  if (C.cols() != n) throw ConfigError("AgentModel: C column count must equal the state dimension");
  expect(E, n, "E");
  expect(F, q, "F");
  expect(Gamma, q, "Gamma");
  expect(L_o, n, "L_o");
  if (L_o.cols() != q) throw ConfigError("AgentModel: L_o column count must equal the output dimension");
  if (K_c.rows() != input_dim() || K_c.cols() != n)
    throw ConfigError("AgentModel: K_c must be input_dim x state_dim");
  const double sr = estimator_spectral_radius();
  if (!(sr < 1.0))
    throw ConfigError("AgentModel: A - L_o*C has spectral radius " + std::to_string(sr) +
                      "; the estimator must be Schur stable");
}

AgentModel AgentModel::double_integrator(int pos_dim, double dt) {
  if (pos_dim < 1) throw ConfigError("double_integrator: pos_dim must be >= 1");
  if (dt <= 0.0) throw ConfigError("double_integrator: dt must be positive");
  const int d = pos_dim;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  AgentModel m;
  m.A = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  m.A.topLeftCorner(d, d) = I;
  m.A.topRightCorner(d, d) = dt * I;
  m.A.bottomRightCorner(d, d) = I;
  m.B = Eigen::MatrixXd::Zero(2 * d, d);
  m.B.topRows(d) = 0.5 * dt * dt * I;
  m.B.bottomRows(d) = dt * I;
  m.C = Eigen::MatrixXd::Zero(d, 2 * d);
  m.C.leftCols(d) = I;
  m.E = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  m.F = I;
  m.Gamma = I;
  // Places the per-axis estimator poles at 0.7 and 0.8 for any dt.
  m.L_o = Eigen::MatrixXd::Zero(2 * d, d);
  m.L_o.topRows(d) = 0.5 * I;
  m.L_o.bottomRows(d) = (0.06 / dt) * I;
  m.K_c = Eigen::MatrixXd::Zero(d, 2 * d);
  m.K_c.leftCols(d) = -0.3 * I;
  m.K_c.rightCols(d) = -0.6 * I;
  m.validate();
  return m;
}

SimState make_sim_state(const AgentModel& model, int num_robots) {
  SimState s;
  s.p = BlockVec(BlockLayout::uniform(num_robots, model.state_dim()));
  s.p_hat = BlockVec(s.p.layout_ptr());
  s.q = BlockVec(BlockLayout::uniform(num_robots, model.output_dim()));
  s.u = BlockVec(BlockLayout::uniform(num_robots, model.input_dim()));
  s.f = BlockVec(BlockLayout::uniform(num_robots, model.fault_dim()));
  s.nu = BlockVec(s.p.layout_ptr());
  return s;
}

void step_dynamics(const AgentModel& model, SimState& state, const BlockVec& attack_f,
                   const NoiseConfig& noise, RngStream& rng) {
  const int n_robots = state.p.num_blocks();
  if (attack_f.num_blocks() != n_robots || attack_f.block(0).size() != model.fault_dim())
    throw ShapeError("step_dynamics: attack vector layout mismatch");
  state.f = attack_f;
  for (int i = 0; i < n_robots; ++i) {
    const Eigen::VectorXd v = noise.v_bound(i) > 0.0
                                  ? rng.uniform_in_ball(model.output_noise_dim(), noise.v_bound(i))
                                  : Eigen::VectorXd::Zero(model.output_noise_dim());
    const Eigen::VectorXd w = noise.w_bound(i) > 0.0
                                  ? rng.uniform_in_ball(model.process_noise_dim(), noise.w_bound(i))
                                  : Eigen::VectorXd::Zero(model.process_noise_dim());
    state.q.block(i) = model.C * state.p.block(i) + model.F * v + model.Gamma * attack_f.block(i);
    state.p.block(i) =
        (model.A * state.p.block(i) + model.B * state.u.block(i) + model.E * w).eval();
  }
}

void step_estimator(const AgentModel& model, SimState& state) {
  const int n_robots = state.p_hat.num_blocks();
  for (int i = 0; i < n_robots; ++i) {
    const Eigen::VectorXd innovation = state.q.block(i) - model.C * state.p_hat.block(i);
    state.p_hat.block(i) = (model.A * state.p_hat.block(i) + model.B * state.u.block(i) +
                            model.L_o * innovation)
                               .eval();
  }
}

Eigen::VectorXd consensus_input(const AgentModel& model, int i, const BlockVec& p_hat,
                                const SwarmGraph& g, int k) {
  if (p_hat.num_blocks() != g.num_vertices())
    throw ShapeError("consensus_input: estimate layout does not match the graph");
  Eigen::VectorXd spread = Eigen::VectorXd::Zero(model.state_dim());
  for (int j : g.neighbors(i)) spread += p_hat.block(i) - p_hat.block(j);
  return model.K_c * spread + model.reference(k);
}

SimState kinematic_mode_step(const BlockVec& formation, const NoiseConfig& noise,
                             const BlockVec& attack_offsets, RngStream& rng) {
  if (!formation.same_layout(attack_offsets))
    throw ShapeError("kinematic_mode_step: formation and attack layouts differ");
  SimState s;
  s.p = formation;
  s.nu = BlockVec(formation.layout_ptr());
  if (noise.nu_max > 0.0)
    s.nu = BlockVec(formation.layout_ptr(), rng.uniform_in_ball(formation.data().size(), noise.nu_max));
  s.p_hat = BlockVec(formation.layout_ptr(), s.p.data() + s.nu.data() - attack_offsets.data());
  s.q = s.p_hat;
  s.u = BlockVec(BlockLayout::uniform(formation.num_blocks(), 1));
  s.f = attack_offsets;
  return s;
}

std::string to_string(SimMode m) { return m == SimMode::kKinematic ? "kinematic" : "dynamics"; }

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "kinematic") return SimMode::kKinematic;
  if (s == "dynamics") return SimMode::kDynamics;
  throw ConfigError("sim mode must be \"kinematic\" or \"dynamics\", got \"" + s + "\"");
}

SimWorld::SimWorld(SimMode mode, const Eigen::MatrixXd& formation_positions, const AgentModel& model,
                   NoiseConfig noise, AttackSchedule attacks, std::uint64_t master_seed)
    : mode_(mode),
      num_robots_(static_cast<int>(formation_positions.cols())),
      pos_dim_(static_cast<int>(formation_positions.rows())),
      model_(model),
      noise_(std::move(noise)),
      attacks_(std::move(attacks)),
      nu_rng_(master_seed, 0xffffffffu, "world-nu") {
  if (num_robots_ < 1) throw ConfigError("SimWorld: needs at least one robot");
  noise_.validate();
  if (mode_ == SimMode::kDynamics) {
    model_.validate();
    if (model_.output_dim() != pos_dim_ || model_.fault_dim() != pos_dim_)
      throw ConfigError("SimWorld: dynamics mode expects position outputs and position faults");
    layout_ = BlockLayout::uniform(num_robots_, model_.state_dim());
  } else {
    layout_ = BlockLayout::uniform(num_robots_, pos_dim_);
  }
  formation_ = BlockVec(layout_);
  for (int i = 0; i < num_robots_; ++i)
    formation_.block(i).head(pos_dim_) = formation_positions.col(i);

  state_ = SimState{};
  state_.p = formation_;
  state_.p_hat = formation_;
  state_.nu = BlockVec(layout_);
  x_true_ = BlockVec(layout_);
  if (mode_ == SimMode::kDynamics) {
    state_.q = BlockVec(BlockLayout::uniform(num_robots_, model_.output_dim()));
    state_.u = BlockVec(BlockLayout::uniform(num_robots_, model_.input_dim()));
    state_.f = BlockVec(BlockLayout::uniform(num_robots_, model_.fault_dim()));
    p_hat_shadow_ = formation_;
    w_rngs_.reserve(num_robots_);
    v_rngs_.reserve(num_robots_);
    for (int i = 0; i < num_robots_; ++i) {
      w_rngs_.emplace_back(master_seed, static_cast<std::uint32_t>(i), "world-w");
      v_rngs_.emplace_back(master_seed, static_cast<std::uint32_t>(i), "world-v");
    }
  }
}

void SimWorld::advance(int k, const SwarmGraph& graph) {
  if (graph.num_vertices() != num_robots_) throw ShapeError("SimWorld: graph vertex count changed");
  const ActiveFaults faults = attacks_.active_faults(
      k, mode_ == SimMode::kDynamics ? state_.f.layout_ptr() : layout_, pos_dim_, 0);
  attacked_now_ = faults.targets;

  if (mode_ == SimMode::kKinematic) {
    SimState s = kinematic_mode_step(formation_, noise_, faults.f, nu_rng_);
    s.k = k + 1;
    state_ = std::move(s);
    x_true_ = faults.f;
    return;
  }

  // Formation-relative consensus: agree on the deviation from the slot, not
  // on the slot itself.
  BlockVec deviation(layout_, state_.p_hat.data() - formation_.data());
  for (int i = 0; i < num_robots_; ++i)
    state_.u.block(i) = consensus_input(model_, i, deviation, graph, k);

  for (int i = 0; i < num_robots_; ++i) {
    const Eigen::VectorXd v = noise_.v_bound(i) > 0.0
                                  ? v_rngs_[i].uniform_in_ball(model_.output_noise_dim(), noise_.v_bound(i))
                                  : Eigen::VectorXd::Zero(model_.output_noise_dim());
    const Eigen::VectorXd w = noise_.w_bound(i) > 0.0
                                  ? w_rngs_[i].uniform_in_ball(model_.process_noise_dim(), noise_.w_bound(i))
                                  : Eigen::VectorXd::Zero(model_.process_noise_dim());
    const Eigen::VectorXd q_clean = model_.C * state_.p.block(i) + model_.F * v;
    const Eigen::VectorXd q_spoofed = q_clean + model_.Gamma * faults.f.block(i);
    state_.q.block(i) = q_spoofed;
    state_.f.block(i) = faults.f.block(i);

    const Eigen::VectorXd bu = model_.B * state_.u.block(i);
    state_.p_hat.block(i) = (model_.A * state_.p_hat.block(i) + bu +
                             model_.L_o * (q_spoofed - model_.C * state_.p_hat.block(i)))
                                .eval();
    p_hat_shadow_.block(i) = (model_.A * p_hat_shadow_.block(i) + bu +
                              model_.L_o * (q_clean - model_.C * p_hat_shadow_.block(i)))
                                 .eval();
    state_.p.block(i) = (model_.A * state_.p.block(i) + bu + model_.E * w).eval();
  }
  state_.k = k + 1;
  state_.nu = BlockVec(layout_, p_hat_shadow_.data() - state_.p.data());
  x_true_ = BlockVec(layout_, p_hat_shadow_.data() - state_.p_hat.data());
}

}  // namespace rangemon
