#include "rangemon/block_vec.hpp"

#include <algorithm>
#include <cmath>

#include "rangemon/errors.hpp"

namespace rangemon {

BlockLayout::BlockLayout(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw ConfigError("BlockLayout: needs at least one block");
  offsets_.resize(dims_.size());
  int off = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 1) throw ConfigError("BlockLayout: every block dimension must be >= 1");
    offsets_[i] = off;
    off += dims_[i];
  }
  total_dim_ = off;
}

std::shared_ptr<const BlockLayout> BlockLayout::uniform(int num_blocks, int block_dim) {
  if (num_blocks < 1) throw ConfigError("BlockLayout: num_blocks must be >= 1");
  return std::make_shared<const BlockLayout>(std::vector<int>(num_blocks, block_dim));
}

std::shared_ptr<const BlockLayout> BlockLayout::make(std::vector<int> block_dims) {
  return std::make_shared<const BlockLayout>(std::move(block_dims));
}

int BlockLayout::block_dim(int i) const {
  if (i < 0 || i >= num_blocks()) throw IndexError("BlockLayout: block index out of range");
  return dims_[i];
}

int BlockLayout::block_offset(int i) const {
  if (i < 0 || i >= num_blocks()) throw IndexError("BlockLayout: block index out of range");
  return offsets_[i];
}

BlockVec::BlockVec(LayoutPtr layout) : layout_(std::move(layout)) {
  if (!layout_) throw ConfigError("BlockVec: null layout");
  data_ = Eigen::VectorXd::Zero(layout_->total_dim());
}

BlockVec::BlockVec(LayoutPtr layout, Eigen::VectorXd data)
    : layout_(std::move(layout)), data_(std::move(data)) {
  if (!layout_) throw ConfigError("BlockVec: null layout");
  if (data_.size() != layout_->total_dim())
    throw ShapeError("BlockVec: data length does not match layout total dimension");
}

Eigen::VectorBlock<Eigen::VectorXd> BlockVec::block(int i) {
  return data_.segment(layout_->block_offset(i), layout_->block_dim(i));
}

Eigen::VectorBlock<const Eigen::VectorXd> BlockVec::block(int i) const {
  return data_.segment(layout_->block_offset(i), layout_->block_dim(i));
}

double norm_2q(const BlockVec& v, double q, double zero_tol) {
  if (std::isnan(q) || q < 0.0) throw ConfigError("norm_2q: q must be in {0} U (0, inf]");
  const int k = v.num_blocks();
  if (q == 0.0) {
    int count = 0;
    for (int i = 0; i < k; ++i)
      if (v.block(i).norm() > zero_tol) ++count;
    return static_cast<double>(count);
  }
  if (std::isinf(q)) {
    double m = 0.0;
    for (int i = 0; i < k; ++i) m = std::max(m, v.block(i).norm());
    return m;
  }
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += std::pow(v.block(i).norm(), q);
  return std::pow(acc, 1.0 / q);
}

BlockVec block_axpy(double alpha, const BlockVec& x, const BlockVec& y) {
  if (!x.same_layout(y)) throw ShapeError("block_axpy: layouts differ");
  return BlockVec(x.layout_ptr(), alpha * x.data() + y.data());
}

bool all_finite(const BlockVec& v) { return v.data().allFinite(); }

}  // namespace rangemon
