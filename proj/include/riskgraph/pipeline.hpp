#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "riskgraph/baselines.hpp"
#include "riskgraph/cohort.hpp"
#include "riskgraph/eval.hpp"
#include "riskgraph/preprocess.hpp"
#include "riskgraph/sage.hpp"
#include "riskgraph/simgraph.hpp"

namespace riskgraph {

inline const std::vector<std::string> kVariants = {"knn-gcn", "diffusion-gcn",
                                                   "diffusion-gcn-age", "logistic", "knn"};

struct PipelineConfig {
  // exactly one of generator / input paths
  std::optional<GenConfig> generator;
  bool generator_seed_explicit = false;
  std::optional<std::string> patients_csv;
  std::optional<std::string> vitals_csv;

  std::string variant = "diffusion-gcn";
  int day = 1;

  int k_train = 200;
  int k_eval = 100;
  std::optional<double> alpha;  // kernel scale; unset = automatic

  TrainConfig train;
  ImputeConfig impute;
  SmoteConfig smote;
  LogisticConfig logistic;
  int knn_k = 5;
  int sage_hidden_dim = 62;
  int sage_num_layers = 2;

  double split_fraction = 0.6;
  double val_fraction = 0.2;  // early-stopping carve-out of the training partition
  double weight_floor = 0.0;
  double analysis_weight_floor = 0.014;
  double lcc_cutoff = 0.75;

  std::string out_dir = "out";
  std::uint64_t master_seed = 1;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const PipelineConfig& cfg);
// stable hex digest of the canonical config serialization
std::string config_hash(const PipelineConfig& cfg);
void validate_config(const PipelineConfig& cfg);

// cohort from whichever input the config names
Cohort obtain_cohort(const PipelineConfig& cfg);

// Daily similarity graphs over per-day feature slices, aggregated either by
// edge-wise mean (knn-gcn) or by the truncated random-walk accumulation
// (diffusion variants).
struct GraphBundle {
  std::optional<WeightedGraph> mean_graph;
  std::optional<DiffusionGraph> diffusion;
  SageGraph sage;
  std::vector<std::string> notes;
};

GraphBundle build_model_graph(const Matrix& standardized_vitals, int day,
                              const std::vector<std::string>& ids, int k,
                              std::optional<double> alpha, double weight_floor,
                              bool use_diffusion);

// Inference graph: the training universe keeps its k_train edges; each new
// node is wired to its k_eval nearest neighbours in the combined population.
// Node order is train ids then new ids.
GraphBundle build_inference_graph(const Matrix& train_vitals,
                                  const std::vector<std::string>& train_ids,
                                  const Matrix& new_vitals,
                                  const std::vector<std::string>& new_ids, int day, int k_train,
                                  int k_eval, std::optional<double> alpha, double weight_floor,
                                  bool use_diffusion);

struct RunOutput {
  EvalReport report;
  std::string report_path;
  std::string hash;
  std::vector<std::string> artifact_paths;
};

// Table-1-style cohort summary (groups by outcome; rank-sum p for the
// continuous rows).
std::string cohort_summary_table(const Cohort& cohort);

void cmd_generate(const PipelineConfig& cfg, std::ostream& out);
RunOutput cmd_run(const PipelineConfig& cfg, std::ostream& log);
void cmd_analyze(const PipelineConfig& cfg, std::ostream& log);
// combined table from previously written run reports
void cmd_report(const std::vector<std::string>& out_dirs, std::ostream& out);

}  // namespace riskgraph
