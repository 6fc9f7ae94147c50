#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskgraph/kernels.hpp"
#include "riskgraph/matrix.hpp"

namespace riskgraph {

// Undirected weighted graph; weights lie in (0, 1], no self-edges.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // edges as (i, j, w) with i != j; both orientations may be supplied
  static WeightedGraph from_edges(std::vector<std::string> node_ids,
                                  const std::vector<std::tuple<int, int, double>>& edges);

  std::size_t size() const { return node_ids_.size(); }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  int index_of(const std::string& id) const;

  // sorted by neighbour index
  const std::vector<std::pair<int, double>>& neighbors(int node) const { return adj_[node]; }
  std::size_t degree(int node) const { return adj_[node].size(); }
  double weight(int a, int b) const;  // 0 when absent

  // canonical (i < j) edge list
  std::vector<std::tuple<int, int, double>> edges() const;
  std::size_t edge_count() const;

 private:
  std::vector<std::string> node_ids_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct KernelConfig {
  int k = 200;
  // kernel scale; unset selects the median squared distance to the k-th
  // neighbour across nodes
  std::optional<double> alpha;
};

struct TransitionMatrix {
  std::vector<std::string> node_ids;
  Matrix probs;  // row-stochastic
};

// Result of the truncated multi-day random-walk accumulation; directed.
struct DiffusionGraph {
  std::vector<std::string> node_ids;
  Matrix adjacency;  // entries >= 0, row sums equal the horizon
  int horizon = 0;
};

// Symmetric k-nearest-neighbour edge set: (i, j) present when i is among the
// k nearest of j or vice versa; distance ties resolved by smaller index.
std::vector<std::pair<int, int>> knn_edges(const Matrix& features, int k,
                                           Exec exec = Exec::Parallel);

// median over nodes of the squared distance to the k-th nearest neighbour
double auto_alpha(const Matrix& features, int k, Exec exec = Exec::Parallel);

// w_ij = exp(-||x_i - x_j||^2 / alpha) over the given edge set
WeightedGraph gaussian_weights(const Matrix& features, std::vector<std::string> node_ids,
                               const std::vector<std::pair<int, int>>& edges, double alpha);

// knn_edges + gaussian_weights with optional automatic kernel scale; k is
// clamped to n-1 (clamp reported through *clamp_note when given)
WeightedGraph build_similarity_graph(const Matrix& features, std::vector<std::string> node_ids,
                                     const KernelConfig& cfg, std::string* clamp_note = nullptr,
                                     Exec exec = Exec::Parallel);

// Row-normalized adjacency D^-1 W; isolated nodes are given a unit self-loop
// before normalization so every row is a probability distribution.
TransitionMatrix transition(const WeightedGraph& graph);

// Edge-wise mean across daily graphs on an identical node ordering; days
// without the edge contribute 0.
WeightedGraph aggregate_mean(const std::vector<WeightedGraph>& graphs);

// A = sum over t of the ordered product M(1) * ... * M(t). With identical
// daily matrices this is the truncated power sum of a single transition
// matrix.
DiffusionGraph diffusion_aggregate(const std::vector<TransitionMatrix>& transitions,
                                   Exec exec = Exec::Parallel);

struct WeightedNeighbor {
  std::string id;
  double weight;
};

// neighbours with weight > weight_floor, heaviest first
std::vector<WeightedNeighbor> neighborhood(const WeightedGraph& graph, const std::string& node,
                                           double weight_floor);
std::vector<WeightedNeighbor> neighborhood(const DiffusionGraph& graph, const std::string& node,
                                           double weight_floor);

// line-oriented "src_id,dst_id,weight" with a one-line header; undirected
// graphs list each edge once (i < j), directed graphs list all entries above
// the floor. A non-empty config_hash is recorded as a leading comment line.
void write_edge_list(const std::string& path, const WeightedGraph& graph,
                     const std::string& config_hash = "");
void write_edge_list(const std::string& path, const DiffusionGraph& graph, double weight_floor,
                     const std::string& config_hash = "");

// reads a directed edge list back; extra_nodes lists isolated nodes that the
// edge list alone cannot recover
DiffusionGraph read_edge_list(const std::string& path,
                              const std::vector<std::string>& extra_nodes = {});

}  // namespace riskgraph
