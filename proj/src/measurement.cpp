#include "rangemon/measurement.hpp"

#include <cmath>

#include "rangemon/errors.hpp"

namespace rangemon {

std::string to_string(NoiseDistribution d) {
  return d == NoiseDistribution::kUniformBall ? "uniform-ball" : "per-edge-uniform";
}

NoiseDistribution noise_distribution_from_string(const std::string& s) {
  if (s == "uniform-ball") return NoiseDistribution::kUniformBall;
  if (s == "per-edge-uniform") return NoiseDistribution::kPerEdgeUniform;
  throw ConfigError("noise distribution must be \"uniform-ball\" or \"per-edge-uniform\", got \"" + s +
                    "\"");
}

void NoiseConfig::validate() const {
  if (omega_max < 0.0 || std::isnan(omega_max)) throw ConfigError("noise.omega_max must be >= 0");
  if (nu_max < 0.0 || std::isnan(nu_max)) throw ConfigError("noise.nu_max must be >= 0");
  for (double b : w_bounds)
    if (b < 0.0 || std::isnan(b)) throw ConfigError("noise.w_bounds entries must be >= 0");
  for (double b : v_bounds)
    if (b < 0.0 || std::isnan(b)) throw ConfigError("noise.v_bounds entries must be >= 0");
}

namespace {
double bound_at(const std::vector<double>& bounds, int agent, const char* what) {
  if (bounds.empty()) return 0.0;
  if (bounds.size() == 1) return bounds[0];
  if (agent < 0 || agent >= static_cast<int>(bounds.size()))
    throw IndexError(std::string(what) + ": no bound for agent " + std::to_string(agent));
  return bounds[agent];
}
}  // namespace

double NoiseConfig::w_bound(int agent) const { return bound_at(w_bounds, agent, "noise.w_bounds"); }
double NoiseConfig::v_bound(int agent) const { return bound_at(v_bounds, agent, "noise.v_bounds"); }

RangeModel::RangeModel(SwarmGraph graph, LayoutPtr layout, int pos_dim, int pos_offset)
    : graph_(std::move(graph)), layout_(std::move(layout)), pos_dim_(pos_dim), pos_offset_(pos_offset) {
  if (!layout_) throw ConfigError("RangeModel: null layout");
  if (pos_dim_ < 2 || pos_dim_ > 3) throw ConfigError("RangeModel: position dimension must be 2 or 3");
  if (pos_offset_ < 0) throw ConfigError("RangeModel: negative position offset");
  if (layout_->num_blocks() != graph_.num_vertices())
    throw ShapeError("RangeModel: layout block count does not match vertex count");
  for (int i = 0; i < layout_->num_blocks(); ++i)
    if (layout_->block_dim(i) < pos_offset_ + pos_dim_)
      throw ShapeError("RangeModel: block " + std::to_string(i) +
                       " too small for the position slice");
}

Eigen::VectorXd RangeModel::position_of(const BlockVec& p, int robot) const {
  if (!p.layout_ptr() || !(*p.layout_ptr() == *layout_))
    throw ShapeError("RangeModel: state layout mismatch");
  return p.block(robot).segment(pos_offset_, pos_dim_);
}

RangeJacobian::RangeJacobian(const RangeModel* model, std::vector<Eigen::VectorXd> directions)
    : model_(model), dirs_(std::move(directions)) {}

const Eigen::VectorXd& RangeJacobian::direction(int l) const {
  if (l < 0 || l >= static_cast<int>(dirs_.size()))
    throw IndexError("RangeJacobian: edge id out of range");
  return dirs_[l];
}

double RangeJacobian::sign(int l, int robot) const {
  const auto& [a, b] = model_->graph().edge(l);
  if (robot == a) return 1.0;
  if (robot == b) return -1.0;
  throw IndexError("RangeJacobian: robot " + std::to_string(robot) + " is not an endpoint of edge " +
                   std::to_string(l));
}

Eigen::VectorXd RangeJacobian::apply(const BlockVec& x) const {
  const auto& g = model_->graph();
  Eigen::VectorXd out(g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& [a, b] = g.edge(l);
    out[l] = dirs_[l].dot(model_->position_of(x, a) - model_->position_of(x, b));
  }
  return out;
}

BlockVec RangeJacobian::apply_transpose(const Eigen::VectorXd& y) const {
  const auto& g = model_->graph();
  if (y.size() != g.num_edges()) throw ShapeError("RangeJacobian: y length must equal edge count");
  BlockVec out(model_->layout());
  const int off = model_->pos_offset();
  const int d = model_->pos_dim();
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& [a, b] = g.edge(l);
    out.block(a).segment(off, d) += dirs_[l] * y[l];
    out.block(b).segment(off, d) -= dirs_[l] * y[l];
  }
  return out;
}

Eigen::MatrixXd RangeJacobian::dense() const {
  const auto& g = model_->graph();
  const auto& layout = *model_->layout();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(g.num_edges(), layout.total_dim());
  const int off = model_->pos_offset();
  const int d = model_->pos_dim();
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& [a, b] = g.edge(l);
    R.row(l).segment(layout.block_offset(a) + off, d) = dirs_[l].transpose();
    R.row(l).segment(layout.block_offset(b) + off, d) = -dirs_[l].transpose();
  }
  return R;
}

Eigen::VectorXd phi(const RangeModel& model, const BlockVec& p) {
  const auto& g = model.graph();
  Eigen::VectorXd out(g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& [a, b] = g.edge(l);
    out[l] = (model.position_of(p, a) - model.position_of(p, b)).norm();
  }
  return out;
}

RangeJacobian jacobian(const RangeModel& model, const BlockVec& p, double delta_min) {
  const auto& g = model.graph();
  std::vector<Eigen::VectorXd> dirs(g.num_edges());
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& [a, b] = g.edge(l);
    Eigen::VectorXd diff = model.position_of(p, a) - model.position_of(p, b);
    const double dist = diff.norm();
    if (dist < delta_min)
      throw DegenerateGeometryError("range gradient undefined: robots " + std::to_string(a) + " and " +
                                    std::to_string(b) + " on edge " + std::to_string(l) +
                                    " are closer than " + std::to_string(delta_min));
    dirs[l] = diff / dist;
  }
  return RangeJacobian(&model, std::move(dirs));
}

Eigen::VectorXd sample_bounded_noise(int dim, double bound, NoiseDistribution dist, RngStream& rng) {
  if (dim < 1) throw ConfigError("sample_bounded_noise: dim must be >= 1");
  if (bound == 0.0) return Eigen::VectorXd::Zero(dim);
  if (dist == NoiseDistribution::kUniformBall) return rng.uniform_in_ball(dim, bound);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-bound, bound);
  const double norm = v.norm();
  if (norm > bound) v *= bound / norm;
  return v;
}

Eigen::VectorXd emulate_ranges(const RangeModel& model, const BlockVec& p_true,
                               const NoiseConfig& noise, RngStream& rng) {
  Eigen::VectorXd y = phi(model, p_true);
  if (noise.omega_max > 0.0)
    y += sample_bounded_noise(model.num_measurements(), noise.omega_max, noise.distribution, rng);
  return y;
}

Eigen::VectorXd emulate_ranges(const RangeModel& model, const BlockVec& p_true,
                               const NoiseConfig& noise, std::uint64_t seed) {
  RngStream rng(seed);
  return emulate_ranges(model, p_true, noise, rng);
}

}  // namespace rangemon
