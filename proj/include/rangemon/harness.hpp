#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rangemon/block_vec.hpp"
#include "rangemon/monitor.hpp"
#include "rangemon/scenario.hpp"
#include "rangemon/solver.hpp"
#include "rangemon/topology.hpp"

namespace rangemon {

// Per-robot reconstruction error magnitudes ||x_true[i] - x_recon[i]||_2.
Eigen::VectorXd reconstruction_error(const BlockVec& x_true, const BlockVec& x_recon);

// Everything recorded while simulating one trial. Series all have length
// `steps`; once a trial diverges the last finite row is repeated so the
// series stay rectangular.
struct TrialMetrics {
  int steps = 0;
  int n_robots = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double first_injection_norm = 0.0;

  bool diverged = false;
  int diverged_at_step = -1;

  std::vector<double> mean_rmse;  // mean over robots of the per-robot error norm
  std::vector<double> std_rmse;   // std over robots
  std::vector<double> chi;        // swarm integrity
  std::vector<int> n_detected;    // confirmed detections
  std::vector<char> swarm_alarm;
  Eigen::MatrixXd robot_rmse;  // n_robots x steps
  Eigen::MatrixXd robot_chi;   // n_robots x steps
  std::vector<std::set<int>> confirmed;  // per step, after K-step confirmation
  std::vector<std::set<int>> attacked;   // per step, ground truth

  // First-confirmation delay (steps) per ever-attacked robot; -1 = never.
  std::map<int, int> detection_latency;

  // Wall-clock bookkeeping (reported on stdout only, never in artifacts).
  double solver_seconds = 0.0;
  long outer_rounds = 0;

  // Final-step detection quality; empty-set conventions give 1.0.
  double final_precision() const;
  double final_recall() const;
};

TrialMetrics run_trial(const ResolvedScenario& scenario, std::uint64_t trial_seed);

// Single-process reference of the same SCP/ADMM arithmetic with direct memory
// access instead of messages; used to cross-check the distributed runtime.
class CentralizedSolver {
 public:
  CentralizedSolver(const SwarmGraph& graph, LayoutPtr layout, int pos_dim, int pos_offset,
                    const SolverConfig& cfg);

  BlockVec outer_round(const BlockVec& p_hat, const Eigen::VectorXd& y_hat);
  const BlockVec& x_bar() const { return x_bar_; }

 private:
  SwarmGraph graph_;
  LayoutPtr layout_;
  int pos_dim_;
  int pos_offset_;
  SolverConfig cfg_;

  BlockVec x_bar_;
  std::vector<std::vector<Eigen::VectorXd>> w_;   // w_[i][ord]: i's copy of neighbor
  std::vector<std::vector<Eigen::VectorXd>> mu_;  // mu_[i][ord]: dual of x[i] = w_i^(j)
  std::vector<std::vector<double>> lambda_;       // lambda_[i][k]: per incident edge
  std::vector<bool> cold_flag_;
};

// Runs `rounds` outer rounds on a fixed linearization input (small swarms
// only); returns the accumulated reconstruction.
BlockVec centralized_oracle(const BlockVec& p_hat, const Eigen::VectorXd& y_hat,
                            const SwarmGraph& graph, LayoutPtr layout, int pos_dim, int pos_offset,
                            const SolverConfig& cfg, int rounds);

// Monte Carlo aggregate for one scenario variant. Curves average converged
// trials only; divergent trials are counted and listed separately.
struct VariantAggregate {
  std::string label;
  int trials = 0;
  int steps = 0;
  int n_robots = 0;
  double epsilon = 0.0;

  std::vector<int> diverged_trials;  // trial indices
  double divergence_rate = 0.0;
  bool curves_include_divergent = false;  // true only if every trial diverged

  std::vector<double> mean_rmse;  // per step, mean over trials of per-trial means
  std::vector<double> std_rmse;   // per step, std over trials of per-trial means
  std::vector<double> chi;        // per step, mean over trials
  std::vector<double> n_detected;
  Eigen::MatrixXd robot_rmse;  // n x steps, mean over trials
  Eigen::MatrixXd robot_chi;

  std::vector<double> trial_final_mean_rmse;  // per trial
  std::vector<char> trial_diverged;
  std::vector<double> trial_precision;  // final step
  std::vector<double> trial_recall;
  long swarm_alarm_steps = 0;  // across all trials

  double final_mean_rmse_converged = std::numeric_limits<double>::quiet_NaN();
  double final_mean_rmse_all = std::numeric_limits<double>::quiet_NaN();
  double mean_precision = 1.0;
  double mean_recall = 1.0;
  double mean_detection_latency = std::numeric_limits<double>::quiet_NaN();

  double solver_seconds = 0.0;  // stdout reporting only
  long outer_rounds = 0;
  long robot_rounds = 0;  // n_robots x outer rounds, the per-robot cost unit

  nlohmann::ordered_json summary_json() const;  // deterministic, no timing
};

VariantAggregate aggregate_trials(const std::string& label, const ResolvedScenario& scenario,
                                  const std::vector<TrialMetrics>& metrics);

// Runs cfg.trials trials (seeds master_seed + t) for every variant; trials
// execute on up to `threads` workers, aggregation is a fixed-order reduce.
std::vector<VariantAggregate> monte_carlo(const ScenarioConfig& cfg, int threads = 1);

// --- artifact export --------------------------------------------------------

// 17-significant-digit formatting; round-trips doubles exactly.
std::string format_double(double v);

// step,mean_rmse,std_rmse,chi,n_detected (+ per-robot columns on request).
void write_trial_csv(const std::string& path, const TrialMetrics& m, bool per_robot_columns);
void write_aggregate_csv(const std::string& path, const VariantAggregate& a,
                         bool per_robot_columns);
void write_json(const std::string& path, const nlohmann::ordered_json& j);

// Resolved config + graph + attack + seeds + code version; excludes anything
// machine-dependent (timing, thread counts).
nlohmann::ordered_json run_metadata(const ResolvedScenario& scenario, int trials);

}  // namespace rangemon
