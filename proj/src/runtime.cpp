#include "rangemon/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <string>
#include <thread>

#include "rangemon/errors.hpp"

namespace rangemon {

namespace {
const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kPoseShare: return "pose-share";
    case MessageKind::kPrimalX: return "primal-x";
    case MessageKind::kPrimalW: return "primal-w";
  }
  return "?";
}
}  // namespace

MessageBus::MessageBus(const SwarmGraph& graph) : graph_(&graph) {
  slots_.resize(2 * static_cast<std::size_t>(graph.num_edges()));
}

int MessageBus::slot_index(int sender, int receiver) const {
  // Directed slots live next to their undirected edge: 2l for low->high.
  const int a = std::min(sender, receiver);
  const int b = std::max(sender, receiver);
  const auto& incident = graph_->incident_edges(sender);
  for (int l : incident) {
    const auto& e = graph_->edge(l);
    if (e.first == a && e.second == b) return 2 * l + (sender == a ? 0 : 1);
  }
  throw SyncError("message between non-neighbors " + std::to_string(sender) + " -> " +
                  std::to_string(receiver));
}

void MessageBus::post(MessageKind kind, int sender, int receiver, int outer, int inner,
                      Eigen::VectorXd a, Eigen::VectorXd b) {
  Slot& s = slots_[slot_index(sender, receiver)];
  if (s.full && s.kind == static_cast<int>(kind) && s.outer == outer && s.inner == inner)
    throw SyncError(std::string("duplicate ") + kind_name(kind) + " message " +
                    std::to_string(sender) + " -> " + std::to_string(receiver) + " in round (" +
                    std::to_string(outer) + "," + std::to_string(inner) + ")");
  s.kind = static_cast<int>(kind);
  s.outer = outer;
  s.inner = inner;
  s.a = std::move(a);
  s.b = std::move(b);
  s.full = true;
  ++posted_;
}

std::pair<const Eigen::VectorXd*, const Eigen::VectorXd*> MessageBus::take(MessageKind kind,
                                                                           int sender, int receiver,
                                                                           int outer, int inner) {
  Slot& s = slots_[slot_index(sender, receiver)];
  if (!s.full || s.kind != static_cast<int>(kind) || s.outer != outer || s.inner != inner)
    throw SyncError(std::string("expected ") + kind_name(kind) + " message " +
                    std::to_string(sender) + " -> " + std::to_string(receiver) + " for round (" +
                    std::to_string(outer) + "," + std::to_string(inner) + "), slot holds " +
                    (s.full ? std::string(kind_name(static_cast<MessageKind>(s.kind))) + " for (" +
                                  std::to_string(s.outer) + "," + std::to_string(s.inner) + ")"
                            : std::string("nothing")));
  s.full = false;
  return {&s.a, &s.b};
}

SwarmRuntime::SwarmRuntime(const SwarmGraph& graph, LayoutPtr layout, int pos_dim, int pos_offset,
                           const SolverConfig& cfg, int node_threads)
    : graph_(graph),
      layout_(std::move(layout)),
      pos_dim_(pos_dim),
      pos_offset_(pos_offset),
      cfg_(cfg),
      node_threads_(std::max(1, node_threads)) {
  cfg_.validate();
  if (!layout_) throw ConfigError("SwarmRuntime: null layout");
  if (layout_->num_blocks() != graph_.num_vertices())
    throw ShapeError("SwarmRuntime: layout block count does not match graph");
  if (graph_.num_vertices() < 2)
    throw ConfigError("SwarmRuntime: needs at least two robots");
  rebuild_nodes(/*keep_x_bar=*/false);
}

void SwarmRuntime::rebuild_nodes(bool keep_x_bar) {
  bus_ = std::make_unique<MessageBus>(graph_);
  const bool fresh = nodes_.empty();
  if (fresh) nodes_.resize(graph_.num_vertices());
  for (int i = 0; i < graph_.num_vertices(); ++i) {
    std::vector<NeighborInfo> nbs;
    const auto& neighbor_ids = graph_.neighbors(i);
    nbs.reserve(neighbor_ids.size());
    for (int j : neighbor_ids) nbs.push_back({j, layout_->block_dim(j)});
    std::vector<LocalEdgeInfo> edges;
    for (int l : graph_.incident_edges(i)) {
      const auto& [a, b] = graph_.edge(l);
      const int other = (a == i) ? b : a;
      const int ord = static_cast<int>(std::lower_bound(neighbor_ids.begin(), neighbor_ids.end(),
                                                        other) -
                                       neighbor_ids.begin());
      edges.push_back({l, ord, a == i ? 1.0 : -1.0});
    }
    if (fresh || !keep_x_bar)
      nodes_[i] = std::make_unique<SolverNode>(i, layout_->block_dim(i), pos_dim_, pos_offset_,
                                               std::move(nbs), std::move(edges), cfg_);
    else
      nodes_[i]->reset_topology(std::move(nbs), std::move(edges));
  }
}

void SwarmRuntime::set_graph(const SwarmGraph& graph) {
  if (graph.num_vertices() != graph_.num_vertices())
    throw ConfigError("SwarmRuntime: vertex count cannot change mid-run");
  graph_ = graph;
  rebuild_nodes(/*keep_x_bar=*/true);
}

template <typename F>
void SwarmRuntime::for_each_node(F&& fn) {
  const int n = static_cast<int>(nodes_.size());
  const int threads = std::min(node_threads_, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

BlockVec SwarmRuntime::outer_round(const BlockVec& p_hat, const Eigen::VectorXd& y_hat) {
  if (!p_hat.layout_ptr() || !(*p_hat.layout_ptr() == *layout_))
    throw ShapeError("SwarmRuntime: p_hat layout mismatch");
  if (y_hat.size() != graph_.num_edges())
    throw ShapeError("SwarmRuntime: expected one measured range per edge");
  const auto t0 = std::chrono::steady_clock::now();

  // Pose / x_bar exchange.
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    node.set_own_pose(p_hat.block(i));
    for (const auto& nb : node.neighbors())
      bus_->post(MessageKind::kPoseShare, i, nb.id, outer_, -1, p_hat.block(i),
                 node.x_bar_own());
  });
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    for (int ord = 0; ord < node.num_neighbors(); ++ord) {
      auto [pose, xbar] =
          bus_->take(MessageKind::kPoseShare, node.neighbors()[ord].id, i, outer_, -1);
      node.receive_pose(ord, *pose, *xbar);
    }
  });

  // Linearize and prepare the round's factorizations.
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    const auto& incident = graph_.incident_edges(i);
    Eigen::VectorXd y_local(static_cast<int>(incident.size()));
    for (std::size_t k = 0; k < incident.size(); ++k) y_local[static_cast<int>(k)] = y_hat[incident[k]];
    node.linearize(y_local);
    node.begin_admm();
  });

  for (int it = 0; it < cfg_.n_admm; ++it) inner_round(it);

  for_each_node([&](int i) { nodes_[i]->accumulate_and_reset(); });
  ++outer_;
  ++outer_rounds_run_;
  solver_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return x_bar_snapshot();
}

void SwarmRuntime::inner_round(int inner) {
  // Phase 1: first primal update, then ship x_hat* and mu to every neighbor.
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    const Eigen::VectorXd& x_hat = node.x_update();
    for (int ord = 0; ord < node.num_neighbors(); ++ord)
      bus_->post(MessageKind::kPrimalX, i, node.neighbors()[ord].id, outer_, inner, x_hat,
                 node.mu_for(ord));
  });
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    for (int ord = 0; ord < node.num_neighbors(); ++ord) {
      auto [x_hat_nb, mu_nb] =
          bus_->take(MessageKind::kPrimalX, node.neighbors()[ord].id, i, outer_, inner);
      node.receive_primal_x(ord, *x_hat_nb, *mu_nb);
    }
  });

  // Phase 2: second primal update; each node returns its neighbors' copies.
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    node.w_update();
    for (int ord = 0; ord < node.num_neighbors(); ++ord)
      bus_->post(MessageKind::kPrimalW, i, node.neighbors()[ord].id, outer_, inner,
                 node.w_for(ord), Eigen::VectorXd());
  });
  for_each_node([&](int i) {
    SolverNode& node = *nodes_[i];
    for (int ord = 0; ord < node.num_neighbors(); ++ord) {
      const Eigen::VectorXd* w =
          bus_->take(MessageKind::kPrimalW, node.neighbors()[ord].id, i, outer_, inner).first;
      node.receive_primal_w(ord, *w);
    }
  });

  // Phase 3: dual ascent at the fresh primal pair.
  for_each_node([&](int i) { nodes_[i]->dual_update(); });
}

BlockVec SwarmRuntime::x_bar_snapshot() const {
  BlockVec out(layout_);
  for (int i = 0; i < graph_.num_vertices(); ++i) out.block(i) = nodes_[i]->x_bar_own();
  return out;
}

}  // namespace rangemon
