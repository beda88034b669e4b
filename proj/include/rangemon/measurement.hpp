#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rangemon/block_vec.hpp"
#include "rangemon/rng.hpp"
#include "rangemon/topology.hpp"

namespace rangemon {

// How measurement noise is drawn. Either way the stacked noise vector
// satisfies the norm bound of the config.
enum class NoiseDistribution { kUniformBall, kPerEdgeUniform };

std::string to_string(NoiseDistribution d);
NoiseDistribution noise_distribution_from_string(const std::string& s);

struct NoiseConfig {
  double omega_max = 0.0;  // bound on the stacked range-noise norm
  double nu_max = 0.0;     // bound on the stacked estimation-error norm
  // Per-agent process / output noise bounds for the dynamics mode.
  // Empty = zero everywhere; one entry = shared by all agents.
  std::vector<double> w_bounds;
  std::vector<double> v_bounds;
  NoiseDistribution distribution = NoiseDistribution::kUniformBall;

  void validate() const;
  double w_bound(int agent) const;
  double v_bound(int agent) const;
};

// Pairwise range measurement model over a swarm graph. States are block
// vectors; the position of robot i lives in components
// [pos_offset, pos_offset + pos_dim) of block i.
class RangeModel {
 public:
  RangeModel(SwarmGraph graph, LayoutPtr layout, int pos_dim, int pos_offset = 0);

  const SwarmGraph& graph() const { return graph_; }
  const LayoutPtr& layout() const { return layout_; }
  int pos_dim() const { return pos_dim_; }
  int pos_offset() const { return pos_offset_; }
  int num_measurements() const { return graph_.num_edges(); }
  // Per-edge measurement dimension (ranges are scalar).
  int measurement_dim(int) const { return 1; }

  Eigen::VectorXd position_of(const BlockVec& p, int robot) const;

 private:
  SwarmGraph graph_;
  LayoutPtr layout_;
  int pos_dim_;
  int pos_offset_;
};

// Sparse range Jacobian: row l touches only the two endpoint blocks of edge l,
// with +-unit-direction entries on the position components.
class RangeJacobian {
 public:
  RangeJacobian(const RangeModel* model, std::vector<Eigen::VectorXd> directions);

  // Unit vector from the higher-id endpoint toward the lower-id endpoint.
  const Eigen::VectorXd& direction(int l) const;
  // +1 for the lower-id endpoint of edge l, -1 for the higher-id one.
  double sign(int l, int robot) const;

  Eigen::VectorXd apply(const BlockVec& x) const;            // R x
  BlockVec apply_transpose(const Eigen::VectorXd& y) const;  // R^T y
  Eigen::MatrixXd dense() const;

  const RangeModel& model() const { return *model_; }

 private:
  const RangeModel* model_;
  std::vector<Eigen::VectorXd> dirs_;
};

// True ranges: entry l = Euclidean distance between the endpoint positions.
Eigen::VectorXd phi(const RangeModel& model, const BlockVec& p);

// Jacobian of phi at p. Throws DegenerateGeometryError naming the edge when
// two connected robots are closer than delta_min.
RangeJacobian jacobian(const RangeModel& model, const BlockVec& p, double delta_min = 1e-6);

// Noisy ranges: phi(p_true) + omega with ||omega||_2 <= omega_max.
Eigen::VectorXd emulate_ranges(const RangeModel& model, const BlockVec& p_true,
                               const NoiseConfig& noise, RngStream& rng);
Eigen::VectorXd emulate_ranges(const RangeModel& model, const BlockVec& p_true,
                               const NoiseConfig& noise, std::uint64_t seed);

// Stacked noise draw honoring the configured distribution and bound.
Eigen::VectorXd sample_bounded_noise(int dim, double bound, NoiseDistribution dist, RngStream& rng);

}  // namespace rangemon
