#include "rangemon/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rangemon/errors.hpp"
#include "rangemon/rng.hpp"

namespace rangemon {

namespace {

// Plain union-find; the test suite keeps its own copy as an oracle.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

bool is_connected(int num_vertices, const std::vector<std::pair<int, int>>& edges) {
  if (num_vertices <= 0) return false;
  DisjointSet ds(num_vertices);
  int components = num_vertices;
  for (const auto& [a, b] : edges)
    if (ds.unite(a, b)) --components;
  return components == 1;
}

SwarmGraph::SwarmGraph(int num_vertices, std::vector<std::pair<int, int>> edges) : n_(num_vertices) {
  if (n_ < 1) throw ConfigError("SwarmGraph: needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a == b) throw ConfigError("SwarmGraph: self-loop at vertex " + std::to_string(a));
    if (a < 0 || a >= n_ || b < 0 || b >= n_)
      throw ConfigError("SwarmGraph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") out of range for " + std::to_string(n_) + " vertices");
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second)
      throw ConfigError("SwarmGraph: duplicate edge (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
    edges_.emplace_back(a, b);
  }
  if (n_ > 1 && !is_connected(n_, edges_))
    throw ConfigError("SwarmGraph: graph is not connected");

  neighbors_.resize(n_);
  incident_.resize(n_);
  for (int l = 0; l < num_edges(); ++l) {
    const auto& [a, b] = edges_[l];
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
    incident_[a].push_back(l);
    incident_[b].push_back(l);
  }
  for (int i = 0; i < n_; ++i) std::sort(neighbors_[i].begin(), neighbors_[i].end());
  // incident_ is already ascending: edges were appended in id order.
}

void SwarmGraph::check_vertex(int i) const {
  if (i < 0 || i >= n_) throw IndexError("SwarmGraph: vertex " + std::to_string(i) + " out of range");
}

const std::pair<int, int>& SwarmGraph::edge(int l) const {
  if (l < 0 || l >= num_edges()) throw IndexError("SwarmGraph: edge id out of range");
  return edges_[l];
}

const std::vector<int>& SwarmGraph::neighbors(int i) const {
  check_vertex(i);
  return neighbors_[i];
}

const std::vector<int>& SwarmGraph::incident_edges(int i) const {
  check_vertex(i);
  return incident_[i];
}

bool SwarmGraph::has_edge(int a, int b) const {
  check_vertex(a);
  check_vertex(b);
  const auto& nb = neighbors_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

nlohmann::ordered_json SwarmGraph::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [a, b] : edges_) arr.push_back({a, b});
  j["edges"] = std::move(arr);
  return j;
}

SwarmGraph SwarmGraph::from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("edges"))
    throw ConfigError("SwarmGraph: JSON needs fields \"n\" and \"edges\"");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("SwarmGraph: each edge must be a pair [i,j]");
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  return SwarmGraph(j.at("n").get<int>(), std::move(edges));
}

TopologySchedule::TopologySchedule(SwarmGraph static_graph) {
  phases_.emplace_back(0, std::move(static_graph));
}

TopologySchedule::TopologySchedule(std::vector<std::pair<int, SwarmGraph>> phases)
    : phases_(std::move(phases)) {
  if (phases_.empty()) throw ConfigError("TopologySchedule: needs at least one phase");
  if (phases_.front().first != 0) throw ConfigError("TopologySchedule: first phase must start at step 0");
  for (std::size_t i = 1; i < phases_.size(); ++i) {
    if (phases_[i].first <= phases_[i - 1].first)
      throw ConfigError("TopologySchedule: start steps must be strictly increasing");
    if (phases_[i].second.num_vertices() != phases_[0].second.num_vertices())
      throw ConfigError("TopologySchedule: all phases must have the same vertex count");
  }
}

const SwarmGraph& TopologySchedule::graph_at(int step) const {
  if (step < 0) throw IndexError("TopologySchedule: negative step");
  const SwarmGraph* g = &phases_.front().second;
  for (const auto& [start, graph] : phases_) {
    if (start > step) break;
    g = &graph;
  }
  return *g;
}

bool TopologySchedule::changes_at(int step) const {
  for (std::size_t i = 1; i < phases_.size(); ++i)
    if (phases_[i].first == step) return true;
  return false;
}

SwarmGraph geometric_graph(const Eigen::MatrixXd& positions, double radius, double* radius_used) {
  const int n = static_cast<int>(positions.cols());
  if (n < 2) throw ConfigError("geometric_graph: needs at least two points");
  if (radius <= 0.0) throw ConfigError("geometric_graph: radius must be positive");
  double r = radius;
  for (;;) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if ((positions.col(a) - positions.col(b)).norm() <= r) edges.emplace_back(a, b);
    if (is_connected(n, edges)) {
      if (radius_used) *radius_used = r;
      return SwarmGraph(n, std::move(edges));
    }
    r *= 1.1;
  }
}

SampledGraph random_geometric_graph(int n, double radius, std::uint64_t seed, int dim) {
  if (n < 2) throw ConfigError("random_geometric_graph: n must be >= 2");
  if (dim < 1) throw ConfigError("random_geometric_graph: dim must be >= 1");
  RngStream rng(seed);
  Eigen::MatrixXd pos(dim, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) pos(k, i) = rng.uniform01();
  double used = 0.0;
  SwarmGraph g = geometric_graph(pos, radius, &used);
  return SampledGraph{std::move(g), std::move(pos), used};
}

double radius_for_mean_degree(const Eigen::MatrixXd& positions, double target_mean_degree) {
  const int n = static_cast<int>(positions.cols());
  if (n < 2) throw ConfigError("radius_for_mean_degree: needs at least two points");
  if (target_mean_degree <= 0.0) throw ConfigError("radius_for_mean_degree: target must be positive");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) dists.push_back((positions.col(a) - positions.col(b)).norm());
  std::sort(dists.begin(), dists.end());
  auto want = static_cast<std::size_t>(std::ceil(target_mean_degree * n / 2.0));
  want = std::min(want, dists.size());
  if (want == 0) want = 1;
  // Nudge past the k-th distance so "<= radius" includes exactly k pairs.
  return dists[want - 1] * (1.0 + 1e-12);
}

}  // namespace rangemon
