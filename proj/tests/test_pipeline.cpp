#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "riskgraph/error.hpp"
#include "riskgraph/pipeline.hpp"

using namespace riskgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PipelineConfig small_config(const std::string& out_dir) {
  PipelineConfig cfg;
  GenConfig gen;
  gen.n_patients = 150;
  gen.severe_fraction = 0.25;
  for (auto& f : gen.vitals) f.missing_rate = std::min(f.missing_rate, 0.3);
  cfg.generator = gen;
  cfg.day = 1;
  cfg.train.max_epochs = 40;
  cfg.out_dir = out_dir;
  cfg.master_seed = 11;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round-trips through json and hashes stably") {
  PipelineConfig cfg = small_config("somewhere");
  cfg.variant = "knn-gcn";
  cfg.day = 2;
  cfg.alpha = 1.5;
  const std::string text = config_to_json_text(cfg);
  const PipelineConfig back = config_from_json_text(text);
  CHECK(back.variant == "knn-gcn");
  CHECK(back.day == 2);
  CHECK(back.alpha == 1.5);
  CHECK(back.out_dir == "somewhere");
  CHECK(back.generator->n_patients == 150);
  CHECK(config_hash(back) == config_hash(cfg));

  PipelineConfig other = cfg;
  other.master_seed += 1;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("config validation rejects bad shapes") {
  PipelineConfig none;
  none.generator.reset();
  CHECK_THROWS_AS(validate_config(none), ValidationError);

  PipelineConfig both = small_config("x");
  both.patients_csv = "p.csv";
  both.vitals_csv = "v.csv";
  CHECK_THROWS_AS(validate_config(both), ValidationError);

  PipelineConfig bad_variant = small_config("x");
  bad_variant.variant = "transformer";
  CHECK_THROWS_AS(validate_config(bad_variant), ValidationError);

  // alpha given as the string "auto" means unset
  const PipelineConfig parsed =
      config_from_json_text(R"({"generator":{},"kernel":{"alpha":"auto"}})");
  CHECK_FALSE(parsed.alpha.has_value());
}

TEST_CASE("cmd_generate writes CSVs, a summary, and is byte-stable") {
  TempDir dir("riskgraph_gen_test");
  PipelineConfig cfg = small_config((dir.path / "a").string());
  std::ostringstream out;
  cmd_generate(cfg, out);
  CHECK(out.str().find("150 patients") != std::string::npos);
  CHECK(out.str().find("covariate") != std::string::npos);
  const std::string patients_a = slurp(dir.path / "a" / "patients.csv");
  const std::string vitals_a = slurp(dir.path / "a" / "vitals.csv");
  CHECK(patients_a.find("id,age,gender") == 0);

  // identical seed reproduces identical bytes
  cfg.out_dir = (dir.path / "b").string();
  std::ostringstream out2;
  cmd_generate(cfg, out2);
  CHECK(slurp(dir.path / "b" / "patients.csv") == patients_a);
  CHECK(slurp(dir.path / "b" / "vitals.csv") == vitals_a);

  PipelineConfig invalid = cfg;
  invalid.generator->severe_fraction = 0.0;
  CHECK_THROWS_AS(cmd_generate(invalid, out2), ValidationError);
}

TEST_CASE("cmd_run produces the full artifact set with embedded config hash") {
  TempDir dir("riskgraph_run_test");
  PipelineConfig cfg = small_config(dir.path.string());
  std::ostringstream log;
  const RunOutput run = cmd_run(cfg, log);
  CHECK(run.report.day == 1);
  CHECK(run.report.model == "diffusion-gcn");
  CHECK(run.report.auc >= 0.0);
  CHECK(run.report.auc <= 1.0);

  for (const char* name :
       {"report.txt", "roc.csv", "predictions.csv", "impute_log.txt", "graph_full.csv",
        "graph_full_nodes.txt", "checkpoint.json", "graph_train.csv", "graph_eval.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir.path / name));
  }
  const std::string report = slurp(dir.path / "report.txt");
  CHECK(report.find("# config_hash=" + run.hash) == 0);
  CHECK(report.find("model=diffusion-gcn") != std::string::npos);

  // checkpoint carries the hash and round-trips
  const std::string ckpt = slurp(dir.path / "checkpoint.json");
  CHECK(ckpt.find(run.hash) != std::string::npos);
  const TrainedModel model = load_model((dir.path / "checkpoint.json").string());
  CHECK(!model.params.weights.empty());

  // graph export: hash comment then the one-line header
  const std::string edges = slurp(dir.path / "graph_full.csv");
  CHECK(edges.find("# config_hash=" + run.hash) == 0);
  CHECK(edges.find("src_id,dst_id,weight\n") != std::string::npos);
}

TEST_CASE("cmd_run baselines and variants share the pipeline") {
  TempDir dir("riskgraph_variants_test");
  for (const std::string variant : {"logistic", "knn", "knn-gcn", "diffusion-gcn-age"}) {
    PipelineConfig cfg = small_config((dir.path / variant).string());
    cfg.variant = variant;
    std::ostringstream log;
    const RunOutput run = cmd_run(cfg, log);
    CAPTURE(variant);
    CHECK(run.report.model == variant);
    CHECK(fs::exists(dir.path / variant / "checkpoint.json"));
    CHECK(run.report.auc > 0.5);  // sanity: better than coin-flipping
  }
}

TEST_CASE("T=1 diffusion aggregate equals the single-day transition graph") {
  TempDir dir("riskgraph_t1_test");
  PipelineConfig cfg = small_config(dir.path.string());
  const Cohort cohort = obtain_cohort(cfg);
  const auto panels = impute_day_panels(cohort, 1, cfg.impute);
  const RiskSet rs = risk_set(cohort, 1, panels);
  const Standardizer st = fit_standardizer(rs.features);
  const Matrix xs = apply_standardizer(st, rs.features);

  GraphBundle diffusion = build_model_graph(xs, 1, rs.ids, 20, std::nullopt, 0.0, true);
  GraphBundle mean = build_model_graph(xs, 1, rs.ids, 20, std::nullopt, 0.0, false);
  REQUIRE(diffusion.diffusion.has_value());
  REQUIRE(mean.mean_graph.has_value());

  // same node set, and the diffusion adjacency is the row-normalized kernel graph
  CHECK(diffusion.diffusion->node_ids == mean.mean_graph->node_ids());
  const TransitionMatrix t = transition(*mean.mean_graph);
  for (std::size_t i = 0; i < t.probs.data().size(); ++i)
    CHECK(diffusion.diffusion->adjacency.data()[i] == t.probs.data()[i]);

  // identical topology, different edge weights only
  const SageGraph& a = diffusion.sage;
  const SageGraph& b = mean.sage;
  REQUIRE(a.size() == b.size());
  for (std::size_t v = 0; v < a.size(); ++v) CHECK(a.neighbors[v] == b.neighbors[v]);
}

TEST_CASE("cmd_analyze consumes run artifacts and handles empty clusters") {
  TempDir dir("riskgraph_analyze_test");
  PipelineConfig cfg = small_config(dir.path.string());
  std::ostringstream log;
  cmd_run(cfg, log);

  std::ostringstream alog;
  cmd_analyze(cfg, alog);
  for (const char* name :
       {"cluster_summary.txt", "lcc_values.csv", "km_high_risk.csv", "km_other.csv"})
    CHECK(fs::exists(dir.path / name));
  const std::string summary = slurp(dir.path / "cluster_summary.txt");
  CHECK(summary.find("cutoff=0.75") != std::string::npos);
  CHECK(summary.find("variable,n_high,mean_high") != std::string::npos);

  // an impossible cutoff empties the cluster but the command still succeeds
  PipelineConfig strict = cfg;
  strict.lcc_cutoff = 1.0;
  strict.analysis_weight_floor = 0.9;  // binarized graph keeps almost nothing
  std::ostringstream wlog;
  cmd_analyze(strict, wlog);
  CHECK(wlog.str().find("empty") != std::string::npos);

  // missing artifacts are a validation error
  PipelineConfig elsewhere = cfg;
  elsewhere.out_dir = (dir.path / "missing").string();
  CHECK_THROWS_AS(cmd_analyze(elsewhere, wlog), ValidationError);
}

TEST_CASE("cmd_report combines run reports into one table") {
  TempDir dir("riskgraph_report_test");
  PipelineConfig cfg = small_config((dir.path / "r1").string());
  std::ostringstream log;
  cmd_run(cfg, log);
  cfg.variant = "logistic";
  cfg.out_dir = (dir.path / "r2").string();
  cmd_run(cfg, log);

  std::ostringstream table;
  cmd_report({(dir.path / "r1").string(), (dir.path / "r2").string()}, table);
  CHECK(table.str().find("diffusion-gcn") != std::string::npos);
  CHECK(table.str().find("logistic") != std::string::npos);

  CHECK_THROWS_AS(cmd_report({(dir.path / "nope").string()}, table), ValidationError);
}

TEST_CASE("cohort summary table reports group statistics") {
  GenConfig gen;
  gen.n_patients = 200;
  gen.severe_fraction = 0.2;
  gen.seed = 5;
  const Cohort cohort = generate_synthetic_cohort(gen);
  const std::string table = cohort_summary_table(cohort);
  CHECK(table.find("age") != std::string::npos);
  CHECK(table.find("bt") != std::string::npos);
  CHECK(table.find("length_of_stay") != std::string::npos);
  CHECK(table.find("female") != std::string::npos);
  CHECK(table.find("copd") != std::string::npos);
  CHECK(table.find("severe (n=40)") != std::string::npos);
}
