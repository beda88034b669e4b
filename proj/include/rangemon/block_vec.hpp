#pragma once

#include <Eigen/Core>
#include <limits>
#include <memory>
#include <vector>

namespace rangemon {

// Immutable description of how a flat vector splits into per-robot (or
// per-edge) blocks.
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<int> block_dims);

  // num_blocks blocks of identical dimension.
  static std::shared_ptr<const BlockLayout> uniform(int num_blocks, int block_dim);
  static std::shared_ptr<const BlockLayout> make(std::vector<int> block_dims);

  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int block_dim(int i) const;
  int block_offset(int i) const;
  int total_dim() const { return total_dim_; }

  bool operator==(const BlockLayout& other) const { return dims_ == other.dims_; }
  bool operator!=(const BlockLayout& other) const { return !(*this == other); }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

// Block-structured real vector: flat contiguous storage plus a layout index.
// Blocks are Eigen segment views into the flat data, never copies.
class BlockVec {
 public:
  BlockVec() = default;  // empty until assigned; only data()/layout_ptr() are safe
  explicit BlockVec(LayoutPtr layout);
  BlockVec(LayoutPtr layout, Eigen::VectorXd data);

  int num_blocks() const { return layout_->num_blocks(); }
  const BlockLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  Eigen::VectorBlock<Eigen::VectorXd> block(int i);
  Eigen::VectorBlock<const Eigen::VectorXd> block(int i) const;

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  bool same_layout(const BlockVec& other) const { return *layout_ == *other.layout_; }

  void set_zero() { data_.setZero(); }

 private:
  LayoutPtr layout_;
  Eigen::VectorXd data_;
};

inline constexpr double kInfQ = std::numeric_limits<double>::infinity();

// Mixed block norm: for q = 0 the count of blocks whose Euclidean norm
// exceeds zero_tol, for 0 < q < inf the q-norm of the per-block Euclidean
// norms, for q = inf their maximum. Throws ConfigError for q < 0 or NaN.
double norm_2q(const BlockVec& v, double q, double zero_tol = 1e-12);

// alpha * x + y. Layouts must match.
BlockVec block_axpy(double alpha, const BlockVec& x, const BlockVec& y);

// True when every entry is finite. Not enforced as a hard invariant so that
// diverging solver states can be observed and flagged rather than thrown.
bool all_finite(const BlockVec& v);

}  // namespace rangemon
