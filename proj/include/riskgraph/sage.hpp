#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/matrix.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/simgraph.hpp"

namespace riskgraph {

// Topology view consumed by the classifier: node ids plus per-node neighbour
// index lists. Lists are kept sorted by neighbour id string so that neighbour
// sampling depends only on (seed, node id, neighbour ids), never on node
// order or graph size.
struct SageGraph {
  std::vector<std::string> node_ids;
  std::vector<std::uint64_t> id_hashes;
  std::vector<std::vector<int>> neighbors;

  std::size_t size() const { return node_ids.size(); }
  int index_of(const std::string& id) const;
};

SageGraph make_sage_graph(const WeightedGraph& graph, double weight_floor);
SageGraph make_sage_graph(const DiffusionGraph& graph, double weight_floor);
// direct construction (tests, graph surgery); edges are undirected pairs
SageGraph make_sage_graph(std::vector<std::string> node_ids,
                          const std::vector<std::pair<int, int>>& undirected_edges);

struct SageArch {
  int input_dim = 0;
  int hidden_dim = 62;
  int output_dim = 2;
  int num_layers = 2;  // aggregation layers, the last one produces logits
};

// Per-layer weights W applied to concat(self, aggregated-neighbourhood); no
// bias terms.
struct SageParams {
  SageArch arch;
  std::vector<Matrix> weights;  // layer k: d_out x 2*d_in

  static SageParams glorot(const SageArch& arch, std::uint64_t seed);
};

struct TrainConfig {
  double learning_rate = 0.05;
  double dropout = 0.1;
  int neighbor_sample_size = 50;
  int max_epochs = 300;
  int patience = 20;
  std::uint64_t seed = 0;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  static AdamState like(const SageParams& params);
};

// in-place bias-corrected Adam step on one parameter matrix
void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long long step,
                 double learning_rate, double beta1, double beta2, double epsilon);

enum class Mode { Train, Eval };

// Identifies one realization of neighbour sampling and dropout. Equal keys
// replay identical masks; training uses round = epoch, evaluation uses a
// fixed round tag.
struct SampleKey {
  std::uint64_t seed = 0;
  std::uint64_t round = 0;
};

inline constexpr std::uint64_t kEvalRound = 0xe7a1e7a1ULL;

// Uniform sample without replacement; all neighbours when degree <= size;
// the node itself when it has no neighbours.
std::vector<int> sample_neighbors(const SageGraph& graph, int node, int sample_size, Rng& rng);

// elementwise mean of equally sized vectors
std::vector<double> mean_aggregate(const std::vector<std::vector<double>>& neighbor_features);

struct ForwardTrace;  // opaque cache for backward

// Logits for the requested nodes. Hidden layers: sample, mean-aggregate,
// concat, linear map, ReLU (+ inverted dropout in Train mode); the final
// layer is linear.
Matrix sage_forward(const SageParams& params, const SageGraph& graph, const Matrix& features,
                    std::span<const int> nodes, Mode mode, const SampleKey& key,
                    const TrainConfig& cfg);

// mean over rows of -log softmax(logits)[label], max-shift stabilized
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// per-class means of the same quantity, averaged over classes; the
// early-stopping monitor for imbalanced validation sets
double balanced_cross_entropy(const Matrix& logits, const std::vector<int>& labels);

struct Batch {
  std::vector<int> nodes;
  std::vector<int> labels;  // aligned with nodes
};

// gradients of cross_entropy over the batch wrt every layer's weights
std::vector<Matrix> sage_gradients(const SageParams& params, const SageGraph& graph,
                                   const Matrix& features, const Batch& batch,
                                   const SampleKey& key, const TrainConfig& cfg,
                                   double* loss_out = nullptr);

double train_step(SageParams& params, AdamState& adam, const SageGraph& graph,
                  const Matrix& features, const Batch& batch, const TrainConfig& cfg,
                  const SampleKey& key);

struct TrainedModel {
  SageParams params;
  TrainConfig config;
  std::uint64_t frozen_sample_seed = 0;
  int best_epoch = 0;
  std::vector<std::pair<double, double>> history;  // (train loss, validation loss) per epoch
};

struct FitSplit {
  std::vector<int> train_nodes;
  std::vector<int> val_nodes;
};

// Trains with per-epoch resampling and early stopping on validation loss
// (stops once the count of consecutive non-improving epochs exceeds
// patience); returns the parameters of the best validation epoch.
TrainedModel fit(const SageGraph& graph, const Matrix& features, const std::vector<int>& labels,
                 const FitSplit& split, const SageArch& arch, const TrainConfig& cfg);

// positive-class probability per node, evaluated with the frozen sampling key
std::vector<double> predict(const TrainedModel& model, const SageGraph& graph,
                            const Matrix& features, std::span<const int> nodes);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace riskgraph
