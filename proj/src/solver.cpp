#include "rangemon/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rangemon/errors.hpp"

namespace rangemon {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("solver.rho must be positive");
  if (n_admm < 1) throw ConfigError("solver.n_admm must be >= 1");
  if (scp_rounds_per_step < 1) throw ConfigError("solver.scp_rounds_per_step must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("solver.epsilon must be positive");
  if (!(dual_threshold > 0.0)) throw ConfigError("solver.dual_threshold must be positive");
  if (!(prox_tol >= 1e-14 && prox_tol <= 1e-2))
    throw ConfigError("solver.prox_tol must lie in [1e-14, 1e-2]");
  if (max_prox_iter < 10) throw ConfigError("solver.max_prox_iter must be >= 10");
  if (!(delta_min > 0.0)) throw ConfigError("solver.delta_min must be positive");
}

Eigen::VectorXd prox_l2_quadratic_eig(const Eigen::VectorXd& eigenvalues,
                                      const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& g,
                                      double tol, int max_iter) {
  const int n = static_cast<int>(g.size());
  const double g_norm = g.norm();
  if (g_norm <= 1.0) return Eigen::VectorXd::Zero(n);
  const double d_min = eigenvalues.minCoeff();
  const double d_max = eigenvalues.maxCoeff();
  if (!(d_min > 0.0)) throw Error("prox_l2_quadratic: quadratic term is not positive definite");

  const Eigen::VectorXd g_hat = eigenvectors.transpose() * g;
  const Eigen::VectorXd a = g_hat.array().square();

  // The minimizer is u(r) = (Q + I/r)^-1 g at the unique r > 0 with
  // ||u(r)|| = r, i.e. the root of h(r) = sum_k a_k/(d_k r + 1)^2 = 1.
  // h is strictly decreasing and convex, with the root bracketed by
  // (||g||-1)/d_max and (||g||-1)/d_min.
  double lo = (g_norm - 1.0) / d_max;
  double hi = (g_norm - 1.0) / d_min;
  const double eps = std::numeric_limits<double>::epsilon();

  auto h_and_slope = [&](double r, double* slope) {
    double h = 0.0, hp = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = 1.0 / (eigenvalues[k] * r + 1.0);
      h += a[k] * t * t;
      hp -= 2.0 * a[k] * eigenvalues[k] * t * t * t;
    }
    *slope = hp;
    return h;
  };

  double r = lo > 0.0 ? lo : 0.5 * (lo + hi);
  double h_val, slope;
  const double target = std::min(tol, 1e-14);
  for (int it = 0; it < max_iter; ++it) {
    h_val = h_and_slope(r, &slope);
    const double resid = r * (std::sqrt(h_val) - 1.0);  // ||u(r)|| - r
    if (std::abs(resid) <= target * r) break;
    if (h_val > 1.0)
      lo = std::max(lo, r);
    else
      hi = std::min(hi, r);
    if (hi - lo <= 4.0 * eps * hi) break;
    double step = (h_val - 1.0) / slope;  // Newton on h(r) - 1
    double next = r - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }

  double slope_unused;
  const double resid = r * (std::sqrt(h_and_slope(r, &slope_unused)) - 1.0);
  if (std::abs(resid) > tol * r)
    throw Error("prox_l2_quadratic: secular equation failed to converge (residual " +
                std::to_string(resid) + " at r=" + std::to_string(r) + ")");

  Eigen::VectorXd coef(n);
  for (int k = 0; k < n; ++k) coef[k] = g_hat[k] * r / (eigenvalues[k] * r + 1.0);
  return eigenvectors * coef;
}

Eigen::VectorXd prox_l2_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g, double tol,
                                  int max_iter) {
  if (Q.rows() != Q.cols() || Q.rows() != g.size())
    throw ShapeError("prox_l2_quadratic: Q must be square and match g");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.info() != Eigen::Success) throw Error("prox_l2_quadratic: eigendecomposition failed");
  return prox_l2_quadratic_eig(es.eigenvalues(), es.eigenvectors(), g, tol, max_iter);
}

SolverNode::SolverNode(int id, int dim, int pos_dim, int pos_offset,
                       std::vector<NeighborInfo> neighbors, std::vector<LocalEdgeInfo> edges,
                       const SolverConfig& cfg)
    : id_(id), dim_(dim), pos_dim_(pos_dim), pos_offset_(pos_offset), cfg_(cfg) {
  cfg_.validate();
  if (id_ < 0) throw ConfigError("SolverNode: negative id");
  if (pos_offset_ < 0 || pos_offset_ + pos_dim_ > dim_)
    throw ShapeError("SolverNode: position slice exceeds the block dimension");
  x_bar_own_ = Eigen::VectorXd::Zero(dim_);
  x_hat_own_ = Eigen::VectorXd::Zero(dim_);
  p_hat_own_ = Eigen::VectorXd::Zero(dim_);
  reset_topology(std::move(neighbors), std::move(edges));
}

void SolverNode::reset_topology(std::vector<NeighborInfo> neighbors,
                                std::vector<LocalEdgeInfo> edges) {
  if (neighbors.empty())
    throw ConfigError("SolverNode " + std::to_string(id_) + ": needs at least one neighbor");
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto& nb = neighbors[k];
    if (nb.id == id_ || nb.id < 0)
      throw ConfigError("SolverNode " + std::to_string(id_) + ": bad neighbor id");
    if (k > 0 && neighbors[k - 1].id >= nb.id)
      throw ConfigError("SolverNode " + std::to_string(id_) + ": neighbors must be ascending");
    if (nb.dim < pos_offset_ + pos_dim_)
      throw ShapeError("SolverNode " + std::to_string(id_) + ": neighbor block too small");
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.neighbor_ordinal < 0 || e.neighbor_ordinal >= static_cast<int>(neighbors.size()))
      throw IndexError("SolverNode " + std::to_string(id_) + ": edge neighbor ordinal out of range");
    if (k > 0 && edges[k - 1].edge_id >= e.edge_id)
      throw ConfigError("SolverNode " + std::to_string(id_) + ": edges must be ascending");
  }
  neighbors_ = std::move(neighbors);
  edges_ = std::move(edges);

  const int deg = num_neighbors();
  x_bar_nb_.assign(deg, Eigen::VectorXd());
  p_hat_nb_.assign(deg, Eigen::VectorXd());
  x_hat_nb_.assign(deg, Eigen::VectorXd());
  w_own_.assign(deg, Eigen::VectorXd());
  w_recv_.assign(deg, Eigen::VectorXd::Zero(dim_));
  mu_own_.assign(deg, Eigen::VectorXd::Zero(dim_));
  mu_recv_.assign(deg, Eigen::VectorXd());
  pose_fresh_.assign(deg, false);
  for (int k = 0; k < deg; ++k) {
    const int nd = neighbors_[k].dim;
    x_bar_nb_[k] = Eigen::VectorXd::Zero(nd);
    p_hat_nb_[k] = Eigen::VectorXd::Zero(nd);
    x_hat_nb_[k] = Eigen::VectorXd::Zero(nd);
    w_own_[k] = Eigen::VectorXd::Zero(nd);
    mu_recv_[k] = Eigen::VectorXd::Zero(nd);
  }
  z_.assign(edges_.size(), 0.0);
  dir_.assign(edges_.size(), Eigen::VectorXd::Zero(pos_dim_));
  lambda_.assign(edges_.size(), 0.0);
  cold_start_flag_ = false;
  linearized_ = false;
  admm_ready_ = false;
  w_solvers_.clear();
}

void SolverNode::check_ordinal(int ordinal) const {
  if (ordinal < 0 || ordinal >= num_neighbors())
    throw IndexError("SolverNode " + std::to_string(id_) + ": neighbor ordinal out of range");
}

void SolverNode::set_own_pose(const Eigen::VectorXd& p_hat_own) {
  if (p_hat_own.size() != dim_) throw ShapeError("SolverNode: own pose dimension mismatch");
  p_hat_own_ = p_hat_own;
}

void SolverNode::receive_pose(int ordinal, const Eigen::VectorXd& p_hat_nb,
                              const Eigen::VectorXd& x_bar_nb) {
  check_ordinal(ordinal);
  if (p_hat_nb.size() != neighbors_[ordinal].dim || x_bar_nb.size() != neighbors_[ordinal].dim)
    throw ShapeError("SolverNode: neighbor pose dimension mismatch");
  p_hat_nb_[ordinal] = p_hat_nb;
  x_bar_nb_[ordinal] = x_bar_nb;  // reconciled copy of the neighbor's own accumulation
  pose_fresh_[ordinal] = true;
}

void SolverNode::linearize(const Eigen::VectorXd& y_local) {
  if (y_local.size() != static_cast<int>(edges_.size()))
    throw ShapeError("SolverNode: expected one measured range per incident edge");
  for (int k = 0; k < num_neighbors(); ++k)
    if (!pose_fresh_[k])
      throw StaleDataError("SolverNode " + std::to_string(id_) + ": no pose from neighbor " +
                           std::to_string(neighbors_[k].id) + " this round");
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  const Eigen::VectorXd own_point = pos(p_hat_own_) + pos(x_bar_own_);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    const Eigen::VectorXd nb_point =
        pos(p_hat_nb_[e.neighbor_ordinal]) + pos(x_bar_nb_[e.neighbor_ordinal]);
    Eigen::VectorXd diff = e.sign > 0 ? own_point - nb_point : nb_point - own_point;
    const double dist = diff.norm();
    if (dist < cfg_.delta_min)
      throw DegenerateGeometryError(
          "range gradient undefined on edge " + std::to_string(e.edge_id) + ": robots " +
          std::to_string(id_) + " and " + std::to_string(neighbors_[e.neighbor_ordinal].id) +
          " are closer than " + std::to_string(cfg_.delta_min));
    dir_[k] = diff / dist;
    z_[k] = y_local[static_cast<int>(k)] - dist;
  }
  linearized_ = true;
  admm_ready_ = false;
}

void SolverNode::begin_admm() {
  if (!linearized_) throw StaleDataError("SolverNode: begin_admm before linearize");
  // Q = rho (sum_l R[l,i]' R[l,i] + |N_i| I): the edge part touches only the
  // position slice, so assemble it there and lift.
  Eigen::MatrixXd pos_part = Eigen::MatrixXd::Zero(pos_dim_, pos_dim_);
  for (const auto& d : dir_) pos_part += d * d.transpose();
  Eigen::MatrixXd Q = static_cast<double>(num_neighbors()) *
                      Eigen::MatrixXd::Identity(dim_, dim_);
  Q.block(pos_offset_, pos_offset_, pos_dim_, pos_dim_) += pos_part;
  Q *= cfg_.rho;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.info() != Eigen::Success) throw Error("SolverNode: eigendecomposition of Q failed");
  q_eigenvalues_ = es.eigenvalues();
  q_eigenvectors_ = es.eigenvectors();

  w_solvers_.clear();
  w_solvers_.reserve(neighbors_.size());
  for (int ord = 0; ord < num_neighbors(); ++ord) {
    const int nd = neighbors_[ord].dim;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nd, nd);
    for (std::size_t k = 0; k < edges_.size(); ++k)
      if (edges_[k].neighbor_ordinal == ord)
        A.block(pos_offset_, pos_offset_, pos_dim_, pos_dim_) += dir_[k] * dir_[k].transpose();
    A *= cfg_.rho;
    w_solvers_.emplace_back(A);
    w_own_[ord].setZero();
    x_hat_nb_[ord].setZero();
  }
  for (auto& w : w_recv_) w.setZero();
  admm_ready_ = true;
}

Eigen::VectorXd SolverNode::assemble_g() const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    const double along_xbar = dir_[k].dot(pos(x_bar_own_));
    const double along_w = dir_[k].dot(pos(w_own_[e.neighbor_ordinal]));
    const double coef = cfg_.rho * (along_xbar + along_w) + e.sign * (cfg_.rho * z_[k] - lambda_[k]);
    g.segment(pos_offset_, pos_dim_) += coef * dir_[k];
  }
  for (int ord = 0; ord < num_neighbors(); ++ord)
    g += cfg_.rho * (x_bar_own_ + w_recv_[ord]) - mu_own_[ord];
  return g;
}

const Eigen::VectorXd& SolverNode::x_update() {
  if (!admm_ready_) throw StaleDataError("SolverNode: x_update before begin_admm");
  const Eigen::VectorXd g = assemble_g();
  const Eigen::VectorXd u =
      prox_l2_quadratic_eig(q_eigenvalues_, q_eigenvectors_, g, cfg_.prox_tol, cfg_.max_prox_iter);
  x_hat_own_ = u - x_bar_own_;
  return x_hat_own_;
}

const Eigen::VectorXd& SolverNode::mu_for(int ordinal) const {
  check_ordinal(ordinal);
  return mu_own_[ordinal];
}

void SolverNode::receive_primal_x(int ordinal, const Eigen::VectorXd& x_hat_nb,
                                  const Eigen::VectorXd& mu_nb) {
  check_ordinal(ordinal);
  const int nd = neighbors_[ordinal].dim;
  if (x_hat_nb.size() != nd || mu_nb.size() != nd)
    throw ShapeError("SolverNode: primal-x message dimension mismatch");
  x_hat_nb_[ordinal] = x_hat_nb;
  mu_recv_[ordinal] = mu_nb;
}

void SolverNode::w_update() {
  if (!admm_ready_) throw StaleDataError("SolverNode: w_update before begin_admm");
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  for (int ord = 0; ord < num_neighbors(); ++ord) {
    Eigen::VectorXd b = cfg_.rho * x_hat_nb_[ord] + mu_recv_[ord];
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      if (e.neighbor_ordinal != ord) continue;
      const double own_range = e.sign * dir_[k].dot(pos(x_hat_own_));
      const double beta = cfg_.rho * (own_range - z_[k]) + lambda_[k];
      // -R[l,j]' beta with R[l,j] = -sign * dir on the position slice.
      b.segment(pos_offset_, pos_dim_) += e.sign * beta * dir_[k];
    }
    w_own_[ord] = w_solvers_[ord].solve(b);
  }
}

const Eigen::VectorXd& SolverNode::w_for(int ordinal) const {
  check_ordinal(ordinal);
  return w_own_[ordinal];
}

void SolverNode::receive_primal_w(int ordinal, const Eigen::VectorXd& w_of_self) {
  check_ordinal(ordinal);
  if (w_of_self.size() != dim_) throw ShapeError("SolverNode: primal-w message dimension mismatch");
  w_recv_[ordinal] = w_of_self;
}

void SolverNode::dual_update() {
  if (!admm_ready_) throw StaleDataError("SolverNode: dual_update before begin_admm");
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  bool over = false;
  const double tau = cfg_.dual_threshold;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    const double c = e.sign * dir_[k].dot(pos(x_hat_own_)) -
                     e.sign * dir_[k].dot(pos(w_own_[e.neighbor_ordinal])) - z_[k];
    lambda_[k] += cfg_.rho * c;
    if (std::abs(lambda_[k]) > tau) over = true;
  }
  for (int ord = 0; ord < num_neighbors(); ++ord) {
    mu_own_[ord] += cfg_.rho * (x_hat_own_ - w_recv_[ord]);
    if (mu_own_[ord].norm() > tau) over = true;
  }
  if (over) cold_start_flag_ = true;
}

void SolverNode::accumulate_and_reset() {
  x_bar_own_ += x_hat_own_;
  for (int ord = 0; ord < num_neighbors(); ++ord) x_bar_nb_[ord] += x_hat_nb_[ord];
  if (!cfg_.warm_start || cold_start_flag_) {
    std::fill(lambda_.begin(), lambda_.end(), 0.0);
    for (auto& mu : mu_own_) mu.setZero();
    cold_start_flag_ = false;
  }
  std::fill(pose_fresh_.begin(), pose_fresh_.end(), false);
  admm_ready_ = false;
}

const Eigen::VectorXd& SolverNode::x_bar_neighbor(int ordinal) const {
  check_ordinal(ordinal);
  return x_bar_nb_[ordinal];
}

double SolverNode::max_dual_norm() const {
  double m = 0.0;
  for (double l : lambda_) m = std::max(m, std::abs(l));
  for (const auto& mu : mu_own_) m = std::max(m, mu.norm());
  return m;
}

double SolverNode::x_objective(const Eigen::VectorXd& x_hat) const {
  if (x_hat.size() != dim_) throw ShapeError("SolverNode: x_objective dimension mismatch");
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  double val = (x_hat + x_bar_own_).norm();
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    const double c = e.sign * dir_[k].dot(pos(x_hat)) -
                     e.sign * dir_[k].dot(pos(w_own_[e.neighbor_ordinal])) - z_[k];
    val += 0.5 * cfg_.rho * c * c + lambda_[k] * c;
  }
  for (int ord = 0; ord < num_neighbors(); ++ord) {
    const Eigen::VectorXd d = x_hat - w_recv_[ord];
    val += 0.5 * cfg_.rho * d.squaredNorm() + mu_own_[ord].dot(d);
  }
  return val;
}

double SolverNode::w_objective(int ordinal, const Eigen::VectorXd& w) const {
  check_ordinal(ordinal);
  if (w.size() != neighbors_[ordinal].dim)
    throw ShapeError("SolverNode: w_objective dimension mismatch");
  const auto pos = [this](const Eigen::VectorXd& v) { return v.segment(pos_offset_, pos_dim_); };
  const Eigen::VectorXd d = x_hat_nb_[ordinal] - w;
  double val = 0.5 * cfg_.rho * d.squaredNorm() + mu_recv_[ordinal].dot(d);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    if (e.neighbor_ordinal != ordinal) continue;
    const double c =
        e.sign * dir_[k].dot(pos(x_hat_own_)) - e.sign * dir_[k].dot(pos(w)) - z_[k];
    val += 0.5 * cfg_.rho * c * c + lambda_[k] * c;
  }
  return val;
}

}  // namespace rangemon
