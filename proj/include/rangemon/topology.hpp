#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rangemon {

// Undirected sensing/communication graph. Vertices are robot ids 0..n-1.
// Edges are stored canonically (a < b) in a stable order; the position of an
// edge in edges() is its edge id for the life of the graph.
class SwarmGraph {
 public:
  SwarmGraph(int num_vertices, std::vector<std::pair<int, int>> edges);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::pair<int, int>& edge(int l) const;

  // Sorted ascending by id.
  const std::vector<int>& neighbors(int i) const;
  // Sorted ascending by edge id.
  const std::vector<int>& incident_edges(int i) const;
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  double mean_degree() const { return 2.0 * num_edges() / num_vertices(); }
  bool has_edge(int a, int b) const;

  nlohmann::ordered_json to_json() const;
  static SwarmGraph from_json(const nlohmann::json& j);

  bool operator==(const SwarmGraph& o) const { return n_ == o.n_ && edges_ == o.edges_; }

 private:
  void check_vertex(int i) const;

  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
};

// Piecewise-constant graph over simulation steps. Lookup at step k returns
// the phase with the largest start_step <= k.
class TopologySchedule {
 public:
  explicit TopologySchedule(SwarmGraph static_graph);
  explicit TopologySchedule(std::vector<std::pair<int, SwarmGraph>> phases);

  const SwarmGraph& graph_at(int step) const;
  // True when a different phase takes effect exactly at `step` (never at 0).
  bool changes_at(int step) const;
  int num_vertices() const { return phases_.front().second.num_vertices(); }
  const std::vector<std::pair<int, SwarmGraph>>& phases() const { return phases_; }

 private:
  std::vector<std::pair<int, SwarmGraph>> phases_;
};

// Connects every pair of points closer than `radius`; if the result is
// disconnected the radius is grown by 10% until it is not. positions is d x n.
SwarmGraph geometric_graph(const Eigen::MatrixXd& positions, double radius,
                           double* radius_used = nullptr);

// Positions sampled uniformly in the unit box [0,1]^dim, then the graph built
// as above. Deterministic given seed.
struct SampledGraph {
  SwarmGraph graph;
  Eigen::MatrixXd positions;  // dim x n
  double radius_used = 0.0;
};
SampledGraph random_geometric_graph(int n, double radius, std::uint64_t seed, int dim = 2);

// Smallest radius whose geometric graph has ceil(n * target_mean_degree / 2)
// edges (before any connectivity growth).
double radius_for_mean_degree(const Eigen::MatrixXd& positions, double target_mean_degree);

bool is_connected(int num_vertices, const std::vector<std::pair<int, int>>& edges);

}  // namespace rangemon
