#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>

#include "rangemon/attack.hpp"
#include "rangemon/block_vec.hpp"
#include "rangemon/measurement.hpp"
#include "rangemon/rng.hpp"
#include "rangemon/topology.hpp"

namespace rangemon {

// Discrete-time agent model shared by every robot of the swarm:
//   p+ = A p + B u + E w        (dynamics)
//   q  = C p + F v + Gamma f    (local output; f is the spoof input)
//   p^+ = A p^ + B u + L_o (q - C p^)   (estimator)
//   u  = K_c sum_j a_ij (p^[i] - p^[j]) + u_r(k)   (consensus law)
struct AgentModel {
  Eigen::MatrixXd A, B, C, E, F, Gamma, L_o, K_c;
  std::function<Eigen::VectorXd(int)> u_r;  // reference input, defaults to zero

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }
  int process_noise_dim() const { return static_cast<int>(E.cols()); }
  int output_noise_dim() const { return static_cast<int>(F.cols()); }
  int fault_dim() const { return static_cast<int>(Gamma.cols()); }

  Eigen::VectorXd reference(int k) const;
  // Throws ConfigError on incompatible dimensions or an unstable A - L_o C.
  void validate() const;
  double estimator_spectral_radius() const;

  // Per-axis double integrator with GNSS-style position outputs and
  // stabilizing gains (estimator poles at 0.7 and 0.8 per axis).
  static AgentModel double_integrator(int pos_dim, double dt = 0.1);
};

// Snapshot of the swarm at the start of step k. q/u/f refer to the most
// recent completed step.
struct SimState {
  int k = 0;
  BlockVec p;      // true states
  BlockVec p_hat;  // local estimates
  BlockVec q;      // outputs
  BlockVec u;      // applied inputs
  BlockVec f;      // active fault inputs
  BlockVec nu;     // attack-free estimation error
};

SimState make_sim_state(const AgentModel& model, int num_robots);

// Computes q at the current p (with fresh output noise and the given fault),
// then advances p with fresh process noise. u is taken from state.u.
void step_dynamics(const AgentModel& model, SimState& state, const BlockVec& attack_f,
                   const NoiseConfig& noise, RngStream& rng);

// p^+ = A p^ + B u + L_o (q - C p^); call after step_dynamics so q belongs to
// the step the estimator is correcting.
void step_estimator(const AgentModel& model, SimState& state);

// Literal consensus law for robot i over its neighbors' estimates.
Eigen::VectorXd consensus_input(const AgentModel& model, int i, const BlockVec& p_hat,
                                const SwarmGraph& g, int k);

// Static-formation shortcut: p = formation, p_hat = p + nu - x_inj with nu
// drawn uniformly in the stacked ball of radius nu_max. The true error is
// exactly x_inj.
SimState kinematic_mode_step(const BlockVec& formation, const NoiseConfig& noise,
                             const BlockVec& attack_offsets, RngStream& rng);

enum class SimMode { kKinematic, kDynamics };

std::string to_string(SimMode m);
SimMode sim_mode_from_string(const std::string& s);

// Owns one trial's ground truth. In dynamics mode a shadow attack-free
// estimator runs on the same inputs and noise draws, so the true error
// p_hat0 - p_hat is exactly block-sparse on the attacked set.
class SimWorld {
 public:
  SimWorld(SimMode mode, const Eigen::MatrixXd& formation_positions, const AgentModel& model,
           NoiseConfig noise, AttackSchedule attacks, std::uint64_t master_seed);

  // Advances the world through step k (call with k = 0, 1, ...).
  // Consensus in dynamics mode is formation-relative to keep the swarm from
  // collapsing to a point.
  void advance(int k, const SwarmGraph& graph);

  const BlockVec& p() const { return state_.p; }
  const BlockVec& p_hat() const { return state_.p_hat; }
  const BlockVec& x_true() const { return x_true_; }
  const BlockVec& nu() const { return state_.nu; }
  const std::set<int>& attacked_now() const { return attacked_now_; }

  const LayoutPtr& layout() const { return layout_; }
  int pos_dim() const { return pos_dim_; }
  int pos_offset() const { return 0; }
  int num_robots() const { return num_robots_; }
  SimMode mode() const { return mode_; }
  const AttackSchedule& attacks() const { return attacks_; }

 private:
  SimMode mode_;
  int num_robots_;
  int pos_dim_;
  LayoutPtr layout_;
  AgentModel model_;
  NoiseConfig noise_;
  AttackSchedule attacks_;
  BlockVec formation_;  // layout-shaped, positions in the leading components
  SimState state_;
  BlockVec p_hat_shadow_;  // attack-free twin of p_hat (dynamics mode)
  BlockVec x_true_;
  std::set<int> attacked_now_;
  RngStream nu_rng_;
  std::vector<RngStream> w_rngs_, v_rngs_;
};

}  // namespace rangemon
