#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "rangemon/block_vec.hpp"

namespace rangemon {

struct SolverConfig {
  double rho = 0.25;             // ADMM penalty weight
  int n_admm = 10;               // inner iterations per outer round
  int scp_rounds_per_step = 1;   // outer rounds per simulation step
  double epsilon = 0.2;          // integrity threshold
  double dual_threshold = 10.0;  // cold-start trigger on dual block norms; inf disables
  bool warm_start = true;        // false: duals zeroed after every outer round
  double prox_tol = 1e-10;
  int max_prox_iter = 100;
  double delta_min = 1e-6;  // guard distance for range linearization

  void validate() const;
};

// Exact minimizer of ||u||_2 + 0.5 u' Q u - g' u for symmetric positive
// definite Q. Zero iff ||g||_2 <= 1; otherwise found via the secular equation
// on Q's eigenvalues, solved by safeguarded Newton well past `tol` (the
// returned iterate always satisfies | ||u|| - r | <= tol * min(1, r)).
Eigen::VectorXd prox_l2_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g,
                                  double tol = 1e-10, int max_iter = 100);
// Same solver on a precomputed eigendecomposition Q = V diag(d) V'.
Eigen::VectorXd prox_l2_quadratic_eig(const Eigen::VectorXd& eigenvalues,
                                      const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& g,
                                      double tol, int max_iter);

// Static description of one robot's neighborhood, built by the runtime.
struct NeighborInfo {
  int id = -1;   // neighbor robot id
  int dim = 0;   // neighbor state-block dimension
};
struct LocalEdgeInfo {
  int edge_id = -1;           // global edge id (message routing, error text)
  int neighbor_ordinal = -1;  // index into the node's neighbor list
  double sign = 1.0;          // +1 when this robot is the lower-id endpoint
};

// One robot's share of the reconstruction: accumulated error, ADMM primal and
// dual state, and the local linearization. Storage and per-round cost depend
// only on the neighborhood size and block dimensions, never on the swarm
// size. All cross-robot data arrives through the receive_* methods.
class SolverNode {
 public:
  SolverNode(int id, int dim, int pos_dim, int pos_offset, std::vector<NeighborInfo> neighbors,
             std::vector<LocalEdgeInfo> edges, const SolverConfig& cfg);

  int id() const { return id_; }
  int dim() const { return dim_; }
  int num_neighbors() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<NeighborInfo>& neighbors() const { return neighbors_; }
  const std::vector<LocalEdgeInfo>& edges() const { return edges_; }

  // --- outer round ------------------------------------------------------
  void set_own_pose(const Eigen::VectorXd& p_hat_own);
  void receive_pose(int ordinal, const Eigen::VectorXd& p_hat_nb, const Eigen::VectorXd& x_bar_nb);
  // Rebuilds z rows and Jacobian blocks at p_hat + x_bar; throws
  // DegenerateGeometryError naming the edge on near-coincident endpoints.
  // y_local holds the measured ranges of the incident edges, in edge order.
  void linearize(const Eigen::VectorXd& y_local);
  // Prepares the per-round factorizations and zeroes the consistency copies.
  void begin_admm();

  // --- one ADMM inner iteration ------------------------------------------
  const Eigen::VectorXd& x_update();
  const Eigen::VectorXd& mu_for(int ordinal) const;  // goes out with x_hat
  void receive_primal_x(int ordinal, const Eigen::VectorXd& x_hat_nb, const Eigen::VectorXd& mu_nb);
  void w_update();
  const Eigen::VectorXd& w_for(int ordinal) const;  // this node's copy of that neighbor
  void receive_primal_w(int ordinal, const Eigen::VectorXd& w_of_self);
  void dual_update();

  // --- end of outer round --------------------------------------------------
  // x_bar[j] += x_hat*[j] for self and every neighbor copy; duals reset per
  // the warm/cold-start policy.
  void accumulate_and_reset();
  // Drops neighbor-indexed state for a new topology (own x_bar survives,
  // duals are cleared — they belong to constraints that no longer exist).
  void reset_topology(std::vector<NeighborInfo> neighbors, std::vector<LocalEdgeInfo> edges);

  const Eigen::VectorXd& x_bar_own() const { return x_bar_own_; }
  const Eigen::VectorXd& x_bar_neighbor(int ordinal) const;
  const Eigen::VectorXd& x_hat_own() const { return x_hat_own_; }
  bool cold_start_flag() const { return cold_start_flag_; }
  double max_dual_norm() const;

  // Objective diagnostics used by the property tests.
  double x_objective(const Eigen::VectorXd& x_hat) const;
  double w_objective(int ordinal, const Eigen::VectorXd& w) const;

 private:
  void check_ordinal(int ordinal) const;
  Eigen::VectorXd assemble_g() const;

  int id_;
  int dim_;
  int pos_dim_;
  int pos_offset_;
  std::vector<NeighborInfo> neighbors_;
  std::vector<LocalEdgeInfo> edges_;
  SolverConfig cfg_;

  // Accumulated SCP state.
  Eigen::VectorXd x_bar_own_;
  std::vector<Eigen::VectorXd> x_bar_nb_;

  // Poses for the current linearization.
  Eigen::VectorXd p_hat_own_;
  std::vector<Eigen::VectorXd> p_hat_nb_;
  std::vector<bool> pose_fresh_;

  // Linearization: z row and unit direction per incident edge.
  std::vector<double> z_;
  std::vector<Eigen::VectorXd> dir_;
  bool linearized_ = false;

  // ADMM iterates.
  Eigen::VectorXd x_hat_own_;
  std::vector<Eigen::VectorXd> x_hat_nb_;   // latest received x_hat*[j]
  std::vector<Eigen::VectorXd> w_own_;      // w_j^(i): this node's copy of j
  std::vector<Eigen::VectorXd> w_recv_;     // w_i^(j): j's copy of this node
  std::vector<Eigen::VectorXd> mu_own_;     // mu_i^(j)
  std::vector<Eigen::VectorXd> mu_recv_;    // mu_j^(i)
  std::vector<double> lambda_;              // one per incident edge (scalar ranges)
  bool cold_start_flag_ = false;

  // Per-outer-round caches.
  Eigen::VectorXd q_eigenvalues_;
  Eigen::MatrixXd q_eigenvectors_;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> w_solvers_;
  bool admm_ready_ = false;
};

}  // namespace rangemon
