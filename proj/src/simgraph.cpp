#include "riskgraph/simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "riskgraph/error.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

WeightedGraph WeightedGraph::from_edges(std::vector<std::string> node_ids,
                                        const std::vector<std::tuple<int, int, double>>& edges) {
  WeightedGraph g;
  g.node_ids_ = std::move(node_ids);
  const int n = static_cast<int>(g.node_ids_.size());
  g.adj_.resize(n);
  std::map<std::pair<int, int>, double> canonical;
  for (const auto& [a, b, w] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw ValidationError("simgraph: edge endpoint out of range");
    if (a == b) throw ValidationError("simgraph: self-edges are not allowed");
    if (!(w > 0.0) || w > 1.0 || !std::isfinite(w))
      throw ValidationError("simgraph: edge weight must lie in (0, 1]");
    auto key = std::minmax(a, b);
    auto [it, inserted] = canonical.emplace(std::pair{key.first, key.second}, w);
    if (!inserted && it->second != w)
      throw ValidationError("simgraph: conflicting weights for one edge");
  }
  for (const auto& [key, w] : canonical) {
    g.adj_[key.first].push_back({key.second, w});
    g.adj_[key.second].push_back({key.first, w});
  }
  for (auto& lst : g.adj_) std::sort(lst.begin(), lst.end());
  return g;
}

int WeightedGraph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < node_ids_.size(); ++i)
    if (node_ids_[i] == id) return static_cast<int>(i);
  return -1;
}

double WeightedGraph::weight(int a, int b) const {
  for (const auto& [nb, w] : adj_[a])
    if (nb == b) return w;
  return 0.0;
}

std::vector<std::tuple<int, int, double>> WeightedGraph::edges() const {
  std::vector<std::tuple<int, int, double>> out;
  for (int i = 0; i < static_cast<int>(adj_.size()); ++i)
    for (const auto& [j, w] : adj_[i])
      if (i < j) out.push_back({i, j, w});
  return out;
}

std::size_t WeightedGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& lst : adj_) twice += lst.size();
  return twice / 2;
}

std::vector<std::pair<int, int>> knn_edges(const Matrix& features, int k, Exec exec) {
  const int n = static_cast<int>(features.rows());
  if (n < 2) throw ValidationError("simgraph: knn_edges needs at least 2 rows");
  if (k < 1) throw ValidationError("simgraph: k must be >= 1");
  if (k >= n)
    throw ValidationError("simgraph: k = " + std::to_string(k) + " must be < n = " +
                          std::to_string(n));
  auto lists = kernels::knn_query(features, features, k, /*exclude_diagonal=*/true, exec);
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (const auto& nb : lists[i]) edges.insert(std::minmax(i, nb.index));
  return {edges.begin(), edges.end()};
}

double auto_alpha(const Matrix& features, int k, Exec exec) {
  const int n = static_cast<int>(features.rows());
  if (n < 2) throw ValidationError("simgraph: auto_alpha needs at least 2 rows");
  const int kk = std::min(k, n - 1);
  auto lists = kernels::knn_query(features, features, kk, /*exclude_diagonal=*/true, exec);
  std::vector<double> kth(n);
  for (int i = 0; i < n; ++i) kth[i] = lists[i].back().sq_dist;
  std::sort(kth.begin(), kth.end());
  const double median =
      n % 2 == 1 ? kth[n / 2] : 0.5 * (kth[n / 2 - 1] + kth[n / 2]);
  if (!(median > 0.0))
    throw ValidationError("simgraph: automatic kernel scale is 0 (too many duplicate rows)");
  return median;
}

WeightedGraph gaussian_weights(const Matrix& features, std::vector<std::string> node_ids,
                               const std::vector<std::pair<int, int>>& edges, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("simgraph: kernel scale alpha must be > 0");
  if (node_ids.size() != features.rows())
    throw ValidationError("simgraph: node_ids/features size mismatch");
  std::vector<std::tuple<int, int, double>> weighted;
  weighted.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    double sq = 0.0;
    for (std::size_t c = 0; c < features.cols(); ++c) {
      const double d = features(i, c) - features(j, c);
      sq += d * d;
    }
    const double w = std::exp(-sq / alpha);
    if (w > 0.0) weighted.push_back({i, j, w});
  }
  return WeightedGraph::from_edges(std::move(node_ids), weighted);
}

WeightedGraph build_similarity_graph(const Matrix& features, std::vector<std::string> node_ids,
                                     const KernelConfig& cfg, std::string* clamp_note,
                                     Exec exec) {
  const int n = static_cast<int>(features.rows());
  if (n < 2) throw ValidationError("simgraph: graph construction needs at least 2 rows");
  int k = cfg.k;
  if (k >= n) {
    k = n - 1;
    if (clamp_note)
      *clamp_note = "simgraph: k clamped from " + std::to_string(cfg.k) + " to " +
                    std::to_string(k) + " (n = " + std::to_string(n) + ")";
  }
  const double alpha = cfg.alpha ? *cfg.alpha : auto_alpha(features, k, exec);
  auto edges = knn_edges(features, k, exec);
  return gaussian_weights(features, std::move(node_ids), edges, alpha);
}

TransitionMatrix transition(const WeightedGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) throw ValidationError("simgraph: transition of an empty graph");
  TransitionMatrix t;
  t.node_ids = graph.node_ids();
  t.probs = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (const auto& [j, w] : graph.neighbors(static_cast<int>(i))) {
      t.probs(i, j) = w;
      row_sum += w;
    }
    if (row_sum == 0.0) {
      t.probs(i, i) = 1.0;  // isolated node: walk stays in place
      row_sum = 1.0;
    }
    for (std::size_t j = 0; j < n; ++j) t.probs(i, j) /= row_sum;
  }
  return t;
}

WeightedGraph aggregate_mean(const std::vector<WeightedGraph>& graphs) {
  if (graphs.empty()) throw ValidationError("simgraph: aggregate_mean needs >= 1 graph");
  const auto& ids = graphs.front().node_ids();
  for (const auto& g : graphs)
    if (g.node_ids() != ids)
      throw ValidationError("simgraph: aggregate_mean node-set mismatch");
  std::map<std::pair<int, int>, double> sums;
  for (const auto& g : graphs)
    for (const auto& [i, j, w] : g.edges()) sums[{i, j}] += w;
  std::vector<std::tuple<int, int, double>> averaged;
  const double inv = 1.0 / static_cast<double>(graphs.size());
  for (const auto& [key, sum] : sums) {
    const double w = sum * inv;
    if (w > 0.0) averaged.push_back({key.first, key.second, w});
  }
  return WeightedGraph::from_edges(ids, averaged);
}

DiffusionGraph diffusion_aggregate(const std::vector<TransitionMatrix>& transitions, Exec exec) {
  if (transitions.empty())
    throw ValidationError("simgraph: diffusion_aggregate needs >= 1 transition matrix");
  const auto& ids = transitions.front().node_ids;
  const std::size_t n = ids.size();
  for (const auto& t : transitions) {
    if (t.node_ids != ids) throw ValidationError("simgraph: diffusion node-ordering mismatch");
    if (t.probs.rows() != n || t.probs.cols() != n)
      throw ValidationError("simgraph: diffusion transition dimension mismatch");
  }
  DiffusionGraph d;
  d.node_ids = ids;
  d.horizon = static_cast<int>(transitions.size());
  Matrix walk = transitions.front().probs;  // product up to day t
  Matrix acc = walk;
  for (std::size_t t = 1; t < transitions.size(); ++t) {
    Matrix next;
    kernels::matmul(walk, transitions[t].probs, next, exec);
    walk = std::move(next);
    for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += walk.data()[i];
  }
  d.adjacency = std::move(acc);
  return d;
}

namespace {

std::vector<WeightedNeighbor> sorted_neighbors(const std::vector<std::pair<int, double>>& items,
                                               const std::vector<std::string>& ids) {
  auto sorted = items;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<WeightedNeighbor> out;
  out.reserve(sorted.size());
  for (const auto& [idx, w] : sorted) out.push_back({ids[idx], w});
  return out;
}

}  // namespace

std::vector<WeightedNeighbor> neighborhood(const WeightedGraph& graph, const std::string& node,
                                           double weight_floor) {
  if (weight_floor < 0.0) throw ValidationError("simgraph: weight_floor must be >= 0");
  const int idx = graph.index_of(node);
  if (idx < 0) throw ValidationError("simgraph: unknown node id " + node);
  std::vector<std::pair<int, double>> kept;
  for (const auto& [j, w] : graph.neighbors(idx))
    if (w > weight_floor) kept.push_back({j, w});
  return sorted_neighbors(kept, graph.node_ids());
}

std::vector<WeightedNeighbor> neighborhood(const DiffusionGraph& graph, const std::string& node,
                                           double weight_floor) {
  if (weight_floor < 0.0) throw ValidationError("simgraph: weight_floor must be >= 0");
  int idx = -1;
  for (std::size_t i = 0; i < graph.node_ids.size(); ++i)
    if (graph.node_ids[i] == node) idx = static_cast<int>(i);
  if (idx < 0) throw ValidationError("simgraph: unknown node id " + node);
  std::vector<std::pair<int, double>> kept;
  for (std::size_t j = 0; j < graph.node_ids.size(); ++j) {
    if (static_cast<int>(j) == idx) continue;
    const double w = graph.adjacency(idx, j);
    if (w > weight_floor) kept.push_back({static_cast<int>(j), w});
  }
  return sorted_neighbors(kept, graph.node_ids);
}

void write_edge_list(const std::string& path, const WeightedGraph& graph,
                     const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw PipelineError("simgraph: cannot write " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "src_id,dst_id,weight\n";
  for (const auto& [i, j, w] : graph.edges())
    out << graph.node_ids()[i] << ',' << graph.node_ids()[j] << ',' << fmt_g(w) << '\n';
}

void write_edge_list(const std::string& path, const DiffusionGraph& graph, double weight_floor,
                     const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw PipelineError("simgraph: cannot write " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "src_id,dst_id,weight\n";
  for (std::size_t i = 0; i < graph.node_ids.size(); ++i)
    for (std::size_t j = 0; j < graph.node_ids.size(); ++j) {
      if (i == j) continue;
      const double w = graph.adjacency(i, j);
      if (w > weight_floor)
        out << graph.node_ids[i] << ',' << graph.node_ids[j] << ',' << fmt_g(w) << '\n';
    }
}

DiffusionGraph read_edge_list(const std::string& path,
                              const std::vector<std::string>& extra_nodes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("simgraph: cannot open edge list " + path);
  std::string line;
  int line_no = 0;
  do {
    if (!std::getline(in, line))
      throw ValidationError("simgraph: " + path + " has no header line");
    ++line_no;
  } while (!trim(line).empty() && trim(line)[0] == '#');
  if (trim(line) != "src_id,dst_id,weight")
    throw ValidationError("simgraph: " + path + " must start with 'src_id,dst_id,weight'");

  std::vector<std::string> ids;
  std::map<std::string, int> index;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = index.emplace(id, static_cast<int>(ids.size()));
    if (inserted) ids.push_back(id);
    return it->second;
  };
  for (const auto& id : extra_nodes) intern(id);

  std::vector<std::tuple<int, int, double>> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3)
      throw ValidationError("simgraph: bad edge list line " + std::to_string(line_no) + " in " +
                            path);
    const int a = intern(trim(f[0]));
    const int b = intern(trim(f[1]));
    entries.push_back({a, b, std::stod(f[2])});
  }
  DiffusionGraph g;
  g.node_ids = ids;
  g.adjacency = Matrix(ids.size(), ids.size(), 0.0);
  for (const auto& [a, b, w] : entries) g.adjacency(a, b) = w;
  return g;
}

}  // namespace riskgraph
