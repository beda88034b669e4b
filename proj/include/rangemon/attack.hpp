#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "rangemon/block_vec.hpp"

namespace rangemon {

// One contiguous attack window. Offsets are position-space vectors added to
// the targeted robots' position outputs; end_step is exclusive.
struct AttackPhase {
  int start_step = 0;
  int end_step = 0;
  std::vector<int> targets;
  std::vector<Eigen::VectorXd> offsets;  // one per target, same order
};

struct ActiveFaults {
  std::set<int> targets;
  BlockVec f;  // injected offsets on the position components, zero elsewhere
};

// Which robots are spoofed when, and by how much. Immutable after
// construction; phases may overlap in time only if they agree on the offset
// of every shared robot.
class AttackSchedule {
 public:
  AttackSchedule() = default;  // attack-free
  AttackSchedule(std::vector<AttackPhase> phases, int num_robots);

  // Union of offsets from all phases containing step k (right-continuous,
  // piecewise constant). Blocks of unaffected robots are zero. The offset is
  // written into components [pos_offset, pos_offset + dim) of each block.
  ActiveFaults active_faults(int k, const LayoutPtr& layout, int pos_dim, int pos_offset = 0) const;

  const std::vector<AttackPhase>& phases() const { return phases_; }
  bool empty() const { return phases_.empty(); }
  // Target set of the first phase with nonzero offsets; empty if attack-free.
  std::set<int> first_targets() const;
  // Stacked norm of the earliest injection; 0 if attack-free.
  double first_injection_norm() const;
  // Issued at construction when a phase targets half the swarm or more.
  const std::vector<std::string>& warnings() const { return warnings_; }

  nlohmann::ordered_json to_json() const;
  static AttackSchedule from_json(const nlohmann::json& j, int num_robots);

 private:
  std::vector<AttackPhase> phases_;
  std::vector<std::string> warnings_;
};

}  // namespace rangemon
