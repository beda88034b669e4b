#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <memory>
#include <vector>

#include "rangemon/block_vec.hpp"
#include "rangemon/solver.hpp"
#include "rangemon/topology.hpp"

namespace rangemon {

// Payload kinds exchanged between neighboring robots.
enum class MessageKind { kPoseShare = 0, kPrimalX = 1, kPrimalW = 2 };

// One mailbox slot per directed edge. A slot holds at most one message; the
// reader checks that the (kind, outer, inner) tag matches the round it is in,
// so stale, duplicate, and missing messages all surface as SyncError.
class MessageBus {
 public:
  explicit MessageBus(const SwarmGraph& graph);

  void post(MessageKind kind, int sender, int receiver, int outer, int inner, Eigen::VectorXd a,
            Eigen::VectorXd b);
  // Returns {a, b} and marks the slot consumed.
  std::pair<const Eigen::VectorXd*, const Eigen::VectorXd*> take(MessageKind kind, int sender,
                                                                 int receiver, int outer, int inner);
  long messages_posted() const { return posted_.load(); }

 private:
  struct Slot {
    int kind = -1;
    int outer = -1;
    int inner = -1;
    bool full = false;
    Eigen::VectorXd a, b;
  };
  int slot_index(int sender, int receiver) const;

  const SwarmGraph* graph_;
  std::vector<Slot> slots_;  // 2 per undirected edge: (a->b, b->a)
  std::atomic<long> posted_{0};
};

// Drives every robot's solver node through lockstep rounds. All cross-robot
// data moves through the MessageBus; node updates between barriers may run on
// several threads without changing any result (reductions are order-fixed and
// each phase writes disjoint state).
class SwarmRuntime {
 public:
  SwarmRuntime(const SwarmGraph& graph, LayoutPtr layout, int pos_dim, int pos_offset,
               const SolverConfig& cfg, int node_threads = 1);

  // Swap in a new communication graph mid-run. Own accumulated errors
  // survive; duals and neighbor copies are dropped (their constraints no
  // longer exist).
  void set_graph(const SwarmGraph& graph);

  // One SCP outer round: pose/x_bar exchange, linearization, n_admm inner
  // rounds, accumulation. y_hat holds one measured range per edge of the
  // current graph. Returns the accumulated x_bar snapshot.
  BlockVec outer_round(const BlockVec& p_hat, const Eigen::VectorXd& y_hat);

  BlockVec x_bar_snapshot() const;
  const SwarmGraph& graph() const { return graph_; }
  SolverNode& node(int i) { return *nodes_.at(i); }
  long messages_posted() const { return bus_->messages_posted(); }

  // Wall-clock seconds spent inside outer_round, and the number of completed
  // outer rounds — the scalability metric divides one by the other.
  double solver_seconds() const { return solver_seconds_; }
  long outer_rounds_run() const { return outer_rounds_run_; }

 private:
  void inner_round(int inner);
  void rebuild_nodes(bool keep_x_bar);
  // Runs fn(i) for every node, possibly on node_threads threads.
  template <typename F>
  void for_each_node(F&& fn);

  SwarmGraph graph_;
  LayoutPtr layout_;
  int pos_dim_;
  int pos_offset_;
  SolverConfig cfg_;
  int node_threads_;
  std::vector<std::unique_ptr<SolverNode>> nodes_;
  std::unique_ptr<MessageBus> bus_;
  int outer_ = 0;
  double solver_seconds_ = 0.0;
  long outer_rounds_run_ = 0;
};

}  // namespace rangemon
