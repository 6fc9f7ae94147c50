#include "riskgraph/sage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "riskgraph/error.hpp"
#include "riskgraph/kernels.hpp"

namespace riskgraph {

namespace {

std::uint64_t node_stream(const SampleKey& key, std::uint64_t purpose, int layer,
                          std::uint64_t id_hash) {
  std::uint64_t s = mix_seed(key.seed, purpose);
  s = mix_seed(s, key.round);
  s = mix_seed(s, static_cast<std::uint64_t>(layer) + 1);
  return mix_seed(s, id_hash);
}

constexpr std::uint64_t kSamplePurpose = 0x5a3e;
constexpr std::uint64_t kDropoutPurpose = 0xd401;

}  // namespace

int SageGraph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < node_ids.size(); ++i)
    if (node_ids[i] == id) return static_cast<int>(i);
  return -1;
}

namespace {

SageGraph finish_graph(std::vector<std::string> ids, std::vector<std::vector<int>> neighbors) {
  SageGraph g;
  g.node_ids = std::move(ids);
  g.neighbors = std::move(neighbors);
  g.id_hashes.reserve(g.node_ids.size());
  for (const auto& id : g.node_ids) g.id_hashes.push_back(fnv1a64(id));
  // sort each list by neighbour id string; sampling then sees a canonical
  // order independent of construction history
  for (auto& lst : g.neighbors) {
    std::sort(lst.begin(), lst.end(),
              [&](int a, int b) { return g.node_ids[a] < g.node_ids[b]; });
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }
  return g;
}

}  // namespace

SageGraph make_sage_graph(const WeightedGraph& graph, double weight_floor) {
  std::vector<std::vector<int>> neighbors(graph.size());
  for (int i = 0; i < static_cast<int>(graph.size()); ++i)
    for (const auto& [j, w] : graph.neighbors(i))
      if (w > weight_floor) neighbors[i].push_back(j);
  return finish_graph(graph.node_ids(), std::move(neighbors));
}

SageGraph make_sage_graph(const DiffusionGraph& graph, double weight_floor) {
  const std::size_t n = graph.node_ids.size();
  std::vector<std::vector<int>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (graph.adjacency(i, j) > weight_floor)
        neighbors[i].push_back(static_cast<int>(j));
    }
  return finish_graph(graph.node_ids, std::move(neighbors));
}

SageGraph make_sage_graph(std::vector<std::string> node_ids,
                          const std::vector<std::pair<int, int>>& undirected_edges) {
  std::vector<std::vector<int>> neighbors(node_ids.size());
  for (const auto& [a, b] : undirected_edges) {
    if (a == b) continue;
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }
  return finish_graph(std::move(node_ids), std::move(neighbors));
}

SageParams SageParams::glorot(const SageArch& arch, std::uint64_t seed) {
  if (arch.input_dim < 1 || arch.hidden_dim < 1 || arch.output_dim < 1 || arch.num_layers < 1)
    throw ValidationError("sage: invalid architecture");
  SageParams p;
  p.arch = arch;
  Rng rng(mix_seed(seed, 0x91071));
  for (int k = 0; k < arch.num_layers; ++k) {
    const std::size_t d_in = k == 0 ? arch.input_dim : arch.hidden_dim;
    const std::size_t d_out = k == arch.num_layers - 1 ? arch.output_dim : arch.hidden_dim;
    Matrix w(d_out, 2 * d_in);
    const double bound = std::sqrt(6.0 / static_cast<double>(2 * d_in + d_out));
    Rng lrng = rng.fork(k);
    for (double& x : w.data()) x = lrng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
  }
  return p;
}

AdamState AdamState::like(const SageParams& params) {
  AdamState s;
  for (const auto& w : params.weights) {
    s.m.emplace_back(w.rows(), w.cols(), 0.0);
    s.v.emplace_back(w.rows(), w.cols(), 0.0);
  }
  return s;
}

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long long step,
                 double learning_rate, double beta1, double beta2, double epsilon) {
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.data().size(); ++i) {
    const double g = grad.data()[i];
    m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * g;
    v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * g * g;
    const double mhat = m.data()[i] / bc1;
    const double vhat = v.data()[i] / bc2;
    param.data()[i] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
  }
}

std::vector<int> sample_neighbors(const SageGraph& graph, int node, int sample_size, Rng& rng) {
  if (node < 0 || node >= static_cast<int>(graph.size()))
    throw ValidationError("sage: unknown node index " + std::to_string(node));
  if (sample_size < 1) throw ValidationError("sage: sample_size must be >= 1");
  const auto& nbrs = graph.neighbors[node];
  if (nbrs.empty()) return {node};  // self-fallback
  if (static_cast<int>(nbrs.size()) <= sample_size) return nbrs;
  // partial Fisher-Yates over a copy
  std::vector<int> pool = nbrs;
  for (int i = 0; i < sample_size; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(sample_size);
  return pool;
}

std::vector<double> mean_aggregate(const std::vector<std::vector<double>>& neighbor_features) {
  if (neighbor_features.empty())
    throw ValidationError("sage: mean_aggregate of an empty neighbourhood");
  std::vector<double> out(neighbor_features.front().size(), 0.0);
  for (const auto& f : neighbor_features) {
    if (f.size() != out.size()) throw ValidationError("sage: aggregate dimension mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i];
  }
  const double inv = 1.0 / static_cast<double>(neighbor_features.size());
  for (double& x : out) x *= inv;
  return out;
}

// Everything backward needs about one forward realization.
struct ForwardTrace {
  // per layer: sampled neighbour groups, concat inputs, pre-activations,
  // dropout masks (empty when not applied), hidden outputs and their
  // pre-capping norms
  std::vector<std::vector<std::vector<int>>> samples;
  std::vector<Matrix> concat;
  std::vector<Matrix> pre_activation;
  std::vector<std::vector<unsigned char>> keep_masks;
  std::vector<Matrix> hidden_out;
  std::vector<std::vector<double>> hidden_norms;
  Matrix output;  // H_L for all nodes
};

namespace {

void forward_all(const SageParams& params, const SageGraph& graph, const Matrix& features,
                 Mode mode, const SampleKey& key, const TrainConfig& cfg, ForwardTrace& trace,
                 Exec exec = Exec::Parallel) {
  const std::size_t n = graph.size();
  if (features.rows() != n) throw ValidationError("sage: features/graph row mismatch");
  if (static_cast<int>(features.cols()) != params.arch.input_dim)
    throw ValidationError("sage: feature dimension " + std::to_string(features.cols()) +
                          " does not match input_dim " + std::to_string(params.arch.input_dim));
  const int L = params.arch.num_layers;
  const bool use_dropout = mode == Mode::Train && cfg.dropout > 0.0;

  trace.samples.assign(L, {});
  trace.concat.assign(L, {});
  trace.pre_activation.assign(L, {});
  trace.keep_masks.assign(L, {});
  trace.hidden_out.assign(L, {});
  trace.hidden_norms.assign(L, {});

  Matrix h = features;
  for (int k = 0; k < L; ++k) {
    const Matrix& w = params.weights[k];
    const std::size_t d_in = w.cols() / 2;
    const std::size_t d_out = w.rows();
    if (h.cols() != d_in) throw ValidationError("sage: layer dimension mismatch");

    auto& samples = trace.samples[k];
    samples.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      Rng rng(node_stream(key, kSamplePurpose, k, graph.id_hashes[v]));
      samples[v] = sample_neighbors(graph, static_cast<int>(v), cfg.neighbor_sample_size, rng);
    }

    Matrix aggregated;
    kernels::group_mean_rows(h, samples, aggregated, exec);

    Matrix concat(n, 2 * d_in);
    for (std::size_t v = 0; v < n; ++v) {
      const double* hv = h.row(v);
      const double* av = aggregated.row(v);
      double* cv = concat.row(v);
      std::copy(hv, hv + d_in, cv);
      std::copy(av, av + d_in, cv + d_in);
    }

    Matrix z;
    kernels::matmul_a_bt(concat, w, z, exec);
    trace.concat[k] = std::move(concat);
    trace.pre_activation[k] = z;

    if (k < L - 1) {
      Matrix& act = z;
      for (double& x : act.data()) x = x > 0.0 ? x : 0.0;
      if (use_dropout) {
        auto& mask = trace.keep_masks[k];
        mask.assign(n * d_out, 1);
        const double scale = 1.0 / (1.0 - cfg.dropout);
        for (std::size_t v = 0; v < n; ++v) {
          Rng rng(node_stream(key, kDropoutPurpose, k, graph.id_hashes[v]));
          for (std::size_t j = 0; j < d_out; ++j) {
            if (rng.uniform01() < cfg.dropout) {
              mask[v * d_out + j] = 0;
              act(v, j) = 0.0;
            } else {
              act(v, j) *= scale;
            }
          }
        }
      }
      // norm-capped hidden embeddings, h / max(1, ||h||): bounds the
      // representation scale like the usual per-layer normalization while
      // staying the identity on small activations
      auto& norms = trace.hidden_norms[k];
      norms.assign(n, 1.0);
      for (std::size_t v = 0; v < n; ++v) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d_out; ++j) sq += act(v, j) * act(v, j);
        const double norm = std::sqrt(sq);
        if (norm > 1.0) {
          norms[v] = norm;
          for (std::size_t j = 0; j < d_out; ++j) act(v, j) /= norm;
        }
      }
      trace.hidden_out[k] = act;
      h = std::move(act);
    } else {
      h = std::move(z);
    }
  }
  trace.output = std::move(h);
}

}  // namespace

Matrix sage_forward(const SageParams& params, const SageGraph& graph, const Matrix& features,
                    std::span<const int> nodes, Mode mode, const SampleKey& key,
                    const TrainConfig& cfg) {
  ForwardTrace trace;
  forward_all(params, graph, features, mode, key, cfg, trace);
  Matrix out(nodes.size(), params.arch.output_dim);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int v = nodes[i];
    if (v < 0 || v >= static_cast<int>(graph.size()))
      throw ValidationError("sage: node index out of range");
    for (int j = 0; j < params.arch.output_dim; ++j) out(i, j) = trace.output(v, j);
  }
  return out;
}

// Mean cross-entropy per class, averaged over classes. Training optimizes the
// plain mean on oversampled (balanced) nodes; this evaluates the matching
// balanced objective on a held-out set whose class mix is untouched.
double balanced_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (logits.rows() != labels.size())
    throw ValidationError("sage: logits/labels size mismatch");
  double total[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r] != 0 ? 1 : 0;
    double mx = logits(r, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(r, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) lse += std::exp(logits(r, j) - mx);
    total[y] += std::log(lse) + mx - logits(r, labels[r]);
    ++count[y];
  }
  if (count[0] == 0 || count[1] == 0) {
    const int present = count[0] ? 0 : 1;
    return total[present] / static_cast<double>(count[present]);
  }
  return 0.5 * (total[0] / count[0] + total[1] / count[1]);
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (logits.rows() != labels.size())
    throw ValidationError("sage: logits/labels size mismatch");
  if (logits.rows() == 0) throw ValidationError("sage: cross_entropy of empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || y >= static_cast<int>(logits.cols()))
      throw ValidationError("sage: label out of range");
    double mx = logits(r, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(r, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) lse += std::exp(logits(r, j) - mx);
    total += std::log(lse) + mx - logits(r, y);
  }
  return total / static_cast<double>(logits.rows());
}

std::vector<Matrix> sage_gradients(const SageParams& params, const SageGraph& graph,
                                   const Matrix& features, const Batch& batch,
                                   const SampleKey& key, const TrainConfig& cfg,
                                   double* loss_out) {
  if (batch.nodes.empty()) throw ValidationError("sage: empty batch");
  if (batch.nodes.size() != batch.labels.size())
    throw ValidationError("sage: batch nodes/labels size mismatch");

  ForwardTrace trace;
  forward_all(params, graph, features, Mode::Train, key, cfg, trace);

  const std::size_t n = graph.size();
  const int L = params.arch.num_layers;
  const int d_out_final = params.arch.output_dim;

  // softmax cross-entropy gradient, averaged over the batch
  Matrix dh(n, d_out_final, 0.0);
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.nodes.size());
  for (std::size_t b = 0; b < batch.nodes.size(); ++b) {
    const int v = batch.nodes[b];
    const int y = batch.labels[b];
    if (v < 0 || v >= static_cast<int>(n))
      throw ValidationError("sage: batch node index out of range");
    if (y < 0 || y >= d_out_final) throw ValidationError("sage: batch label out of range");
    double mx = trace.output(v, 0);
    for (int j = 1; j < d_out_final; ++j) mx = std::max(mx, trace.output(v, j));
    double lse = 0.0;
    for (int j = 0; j < d_out_final; ++j) lse += std::exp(trace.output(v, j) - mx);
    loss += std::log(lse) + mx - trace.output(v, y);
    for (int j = 0; j < d_out_final; ++j) {
      const double p = std::exp(trace.output(v, j) - mx) / lse;
      dh(v, j) += (p - (j == y ? 1.0 : 0.0)) * inv_batch;
    }
  }
  loss *= inv_batch;
  if (!std::isfinite(loss)) throw PipelineError("sage: non-finite training loss");
  if (loss_out) *loss_out = loss;

  std::vector<Matrix> grads(L);
  for (int k = L - 1; k >= 0; --k) {
    const Matrix& w = params.weights[k];
    const std::size_t d_in = w.cols() / 2;
    const std::size_t d_out = w.rows();

    Matrix dz = std::move(dh);
    if (k < L - 1) {
      const auto& mask = trace.keep_masks[k];
      const double scale = 1.0 / (1.0 - cfg.dropout);
      const Matrix& z = trace.pre_activation[k];
      const Matrix& y = trace.hidden_out[k];
      const auto& norms = trace.hidden_norms[k];
      for (std::size_t v = 0; v < n; ++v) {
        // through the norm cap: identity below the cap, projection above
        if (norms[v] > 1.0) {
          double dot = 0.0;
          for (std::size_t j = 0; j < d_out; ++j) dot += y(v, j) * dz(v, j);
          for (std::size_t j = 0; j < d_out; ++j)
            dz(v, j) = (dz(v, j) - y(v, j) * dot) / norms[v];
        }
        for (std::size_t j = 0; j < d_out; ++j) {
          double g = dz(v, j);
          if (!mask.empty()) g = mask[v * d_out + j] ? g * scale : 0.0;
          dz(v, j) = z(v, j) > 0.0 ? g : 0.0;
        }
      }
    }

    kernels::matmul_at_b(dz, trace.concat[k], grads[k]);

    if (k == 0) break;

    Matrix dc;
    kernels::matmul(dz, w, dc);

    // split dc into the self part and the aggregated part, then push the
    // aggregated part back through the mean over each sampled group
    Matrix da(n, d_in);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < d_in; ++j) da(v, j) = dc(v, d_in + j);

    std::vector<std::vector<kernels::WeightedRef>> refs(n);
    for (std::size_t v = 0; v < n; ++v) {
      const auto& s = trace.samples[k][v];
      const double wgt = 1.0 / static_cast<double>(s.size());
      for (int u : s) refs[u].push_back({static_cast<int>(v), wgt});
    }
    Matrix dprev;
    kernels::weighted_gather_rows(da, refs, dprev);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < d_in; ++j) dprev(v, j) += dc(v, j);
    dh = std::move(dprev);
  }
  return grads;
}

double train_step(SageParams& params, AdamState& adam, const SageGraph& graph,
                  const Matrix& features, const Batch& batch, const TrainConfig& cfg,
                  const SampleKey& key) {
  double loss = 0.0;
  auto grads = sage_gradients(params, graph, features, batch, key, cfg, &loss);
  ++adam.step;
  for (std::size_t k = 0; k < params.weights.size(); ++k)
    adam_update(params.weights[k], grads[k], adam.m[k], adam.v[k], adam.step, cfg.learning_rate,
                adam.beta1, adam.beta2, adam.epsilon);
  return loss;
}

TrainedModel fit(const SageGraph& graph, const Matrix& features, const std::vector<int>& labels,
                 const FitSplit& split, const SageArch& arch, const TrainConfig& cfg) {
  if (split.train_nodes.empty()) throw ValidationError("sage: fit with empty train set");
  if (split.val_nodes.empty()) throw ValidationError("sage: fit with empty validation set");
  if (labels.size() != graph.size()) throw ValidationError("sage: labels/graph size mismatch");
  {
    std::vector<int> sorted_train = split.train_nodes;
    std::vector<int> sorted_val = split.val_nodes;
    std::sort(sorted_train.begin(), sorted_train.end());
    std::sort(sorted_val.begin(), sorted_val.end());
    std::vector<int> overlap;
    std::set_intersection(sorted_train.begin(), sorted_train.end(), sorted_val.begin(),
                          sorted_val.end(), std::back_inserter(overlap));
    if (!overlap.empty())
      throw ValidationError("sage: train and validation node sets overlap");
  }
  bool has_pos = false, has_neg = false;
  for (int v : split.train_nodes) (labels[v] != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw ValidationError("sage: training nodes must include both classes");
  if (cfg.max_epochs < 1) throw ValidationError("sage: max_epochs must be >= 1");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    throw ValidationError("sage: dropout must lie in [0, 1)");
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("sage: learning_rate must be > 0");

  TrainedModel model;
  model.config = cfg;
  model.frozen_sample_seed = mix_seed(cfg.seed, 0xf207e);
  model.params = SageParams::glorot(arch, mix_seed(cfg.seed, 0x114177));

  Batch train_batch;
  train_batch.nodes = split.train_nodes;
  for (int v : split.train_nodes) train_batch.labels.push_back(labels[v] != 0 ? 1 : 0);
  std::vector<int> val_labels;
  for (int v : split.val_nodes) val_labels.push_back(labels[v] != 0 ? 1 : 0);

  AdamState adam = AdamState::like(model.params);
  SageParams current = model.params;
  const SampleKey eval_key{model.frozen_sample_seed, kEvalRound};

  double best_val = std::numeric_limits<double>::infinity();
  SageParams best = current;
  int best_epoch = 0;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const SampleKey key{cfg.seed, static_cast<std::uint64_t>(epoch)};
    const double train_loss = train_step(current, adam, graph, features, train_batch, cfg, key);
    const Matrix val_logits =
        sage_forward(current, graph, features, split.val_nodes, Mode::Eval, eval_key, cfg);
    const double val_loss = balanced_cross_entropy(val_logits, val_labels);
    model.history.push_back({train_loss, val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      best = current;
      best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
      if (stale > cfg.patience) break;
    }
  }
  model.params = std::move(best);
  model.best_epoch = best_epoch;
  return model;
}

std::vector<double> predict(const TrainedModel& model, const SageGraph& graph,
                            const Matrix& features, std::span<const int> nodes) {
  if (model.params.arch.output_dim != 2)
    throw ValidationError("sage: predict expects a binary-output model");
  const SampleKey key{model.frozen_sample_seed, kEvalRound};
  const Matrix logits =
      sage_forward(model.params, graph, features, nodes, Mode::Eval, key, model.config);
  std::vector<double> probs(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double mx = std::max(logits(i, 0), logits(i, 1));
    const double e0 = std::exp(logits(i, 0) - mx);
    const double e1 = std::exp(logits(i, 1) - mx);
    probs[i] = e1 / (e0 + e1);
  }
  return probs;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.data().size())
    throw ValidationError("sage: checkpoint matrix size mismatch");
  m.data() = data;
  return m;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "riskgraph-sage-v1";
  j["arch"] = {{"input_dim", model.params.arch.input_dim},
               {"hidden_dim", model.params.arch.hidden_dim},
               {"output_dim", model.params.arch.output_dim},
               {"num_layers", model.params.arch.num_layers}};
  j["config"] = {{"learning_rate", model.config.learning_rate},
                 {"dropout", model.config.dropout},
                 {"neighbor_sample_size", model.config.neighbor_sample_size},
                 {"max_epochs", model.config.max_epochs},
                 {"patience", model.config.patience},
                 {"seed", model.config.seed}};
  j["frozen_sample_seed"] = model.frozen_sample_seed;
  j["best_epoch"] = model.best_epoch;
  j["history"] = model.history;
  j["weights"] = nlohmann::json::array();
  for (const auto& w : model.params.weights) j["weights"].push_back(matrix_to_json(w));
  std::ofstream out(path);
  if (!out) throw PipelineError("sage: cannot write checkpoint " + path);
  out << j.dump(1) << '\n';
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("sage: cannot open checkpoint " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "riskgraph-sage-v1")
    throw ValidationError("sage: unrecognized checkpoint format in " + path);
  TrainedModel model;
  const auto& a = j.at("arch");
  model.params.arch = {a.at("input_dim").get<int>(), a.at("hidden_dim").get<int>(),
                       a.at("output_dim").get<int>(), a.at("num_layers").get<int>()};
  const auto& c = j.at("config");
  model.config.learning_rate = c.at("learning_rate").get<double>();
  model.config.dropout = c.at("dropout").get<double>();
  model.config.neighbor_sample_size = c.at("neighbor_sample_size").get<int>();
  model.config.max_epochs = c.at("max_epochs").get<int>();
  model.config.patience = c.at("patience").get<int>();
  model.config.seed = c.at("seed").get<std::uint64_t>();
  model.frozen_sample_seed = j.at("frozen_sample_seed").get<std::uint64_t>();
  model.best_epoch = j.at("best_epoch").get<int>();
  model.history = j.at("history").get<std::vector<std::pair<double, double>>>();
  for (const auto& wj : j.at("weights")) model.params.weights.push_back(matrix_from_json(wj));
  return model;
}

}  // namespace riskgraph
