#include "riskgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "riskgraph/analysis.hpp"
#include "riskgraph/error.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedGenerator = 0x6e47;
constexpr std::uint64_t kSeedImpute = 0x1417;
constexpr std::uint64_t kSeedSplit = 0x5147;
constexpr std::uint64_t kSeedValSplit = 0x7a15;
constexpr std::uint64_t kSeedSmote = 0x5307;
constexpr std::uint64_t kSeedTrain = 0x7247;

json feature_gen_to_json(const FeatureGen& f, bool with_missing) {
  json j = {{"nonsevere_mean", f.nonsevere_mean},
            {"nonsevere_sd", f.nonsevere_sd},
            {"severe_mean", f.severe_mean},
            {"severe_sd", f.severe_sd}};
  if (with_missing) j["missing_rate"] = f.missing_rate;
  return j;
}

void feature_gen_from_json(const json& j, FeatureGen& f) {
  f.nonsevere_mean = j.value("nonsevere_mean", f.nonsevere_mean);
  f.nonsevere_sd = j.value("nonsevere_sd", f.nonsevere_sd);
  f.severe_mean = j.value("severe_mean", f.severe_mean);
  f.severe_sd = j.value("severe_sd", f.severe_sd);
  f.missing_rate = j.value("missing_rate", f.missing_rate);
}

json gen_to_json(const GenConfig& g) {
  json vitals;
  for (std::size_t v = 0; v < kNumVitals; ++v)
    vitals[kVitalNames[v]] = feature_gen_to_json(g.vitals[v], true);
  json com_ns, com_sv;
  for (std::size_t c = 0; c < kNumComorbidities; ++c) {
    com_ns[kComorbidityNames[c]] = g.comorbidity_rate_nonsevere[c];
    com_sv[kComorbidityNames[c]] = g.comorbidity_rate_severe[c];
  }
  return {{"n_patients", g.n_patients},
          {"severe_fraction", g.severe_fraction},
          {"vitals", vitals},
          {"age", feature_gen_to_json(g.age, false)},
          {"female_rate_nonsevere", g.female_rate_nonsevere},
          {"female_rate_severe", g.female_rate_severe},
          {"comorbidity_rate_nonsevere", com_ns},
          {"comorbidity_rate_severe", com_sv},
          {"max_stay_days", g.max_stay_days},
          {"discharge_day_mean", g.discharge_day_mean},
          {"discharge_day_sd", g.discharge_day_sd},
          {"transfer_day_probs", g.transfer_day_probs},
          {"ar1_phi", g.ar1_phi},
          {"severe_onset_fraction", g.severe_onset_fraction},
          {"seed", g.seed}};
}

GenConfig gen_from_json(const json& j, bool& seed_explicit) {
  GenConfig g;
  g.n_patients = j.value("n_patients", g.n_patients);
  g.severe_fraction = j.value("severe_fraction", g.severe_fraction);
  if (j.contains("vitals"))
    for (std::size_t v = 0; v < kNumVitals; ++v)
      if (j["vitals"].contains(kVitalNames[v]))
        feature_gen_from_json(j["vitals"][kVitalNames[v]], g.vitals[v]);
  if (j.contains("age")) feature_gen_from_json(j["age"], g.age);
  g.female_rate_nonsevere = j.value("female_rate_nonsevere", g.female_rate_nonsevere);
  g.female_rate_severe = j.value("female_rate_severe", g.female_rate_severe);
  for (std::size_t c = 0; c < kNumComorbidities; ++c) {
    if (j.contains("comorbidity_rate_nonsevere"))
      g.comorbidity_rate_nonsevere[c] =
          j["comorbidity_rate_nonsevere"].value(kComorbidityNames[c],
                                                g.comorbidity_rate_nonsevere[c]);
    if (j.contains("comorbidity_rate_severe"))
      g.comorbidity_rate_severe[c] =
          j["comorbidity_rate_severe"].value(kComorbidityNames[c], g.comorbidity_rate_severe[c]);
  }
  g.max_stay_days = j.value("max_stay_days", g.max_stay_days);
  g.discharge_day_mean = j.value("discharge_day_mean", g.discharge_day_mean);
  g.discharge_day_sd = j.value("discharge_day_sd", g.discharge_day_sd);
  if (j.contains("transfer_day_probs"))
    g.transfer_day_probs = j["transfer_day_probs"].get<std::vector<double>>();
  g.ar1_phi = j.value("ar1_phi", g.ar1_phi);
  g.severe_onset_fraction = j.value("severe_onset_fraction", g.severe_onset_fraction);
  seed_explicit = j.contains("seed");
  g.seed = j.value("seed", g.seed);
  return g;
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  if (j.contains("generator"))
    cfg.generator = gen_from_json(j["generator"], cfg.generator_seed_explicit);
  if (j.contains("inputs")) {
    cfg.patients_csv = j["inputs"].at("patients_csv").get<std::string>();
    cfg.vitals_csv = j["inputs"].at("vitals_csv").get<std::string>();
  }
  cfg.variant = j.value("variant", cfg.variant);
  cfg.day = j.value("day", cfg.day);
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    cfg.k_train = k.value("k_train", cfg.k_train);
    cfg.k_eval = k.value("k_eval", cfg.k_eval);
    if (k.contains("alpha") && !k["alpha"].is_string())
      cfg.alpha = k["alpha"].get<double>();
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.dropout = t.value("dropout", cfg.train.dropout);
    cfg.train.neighbor_sample_size =
        t.value("neighbor_sample_size", cfg.train.neighbor_sample_size);
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.patience = t.value("patience", cfg.train.patience);
  }
  if (j.contains("impute")) {
    cfg.impute.n_iterations = j["impute"].value("n_iterations", cfg.impute.n_iterations);
    cfg.impute.ridge_lambda = j["impute"].value("ridge_lambda", cfg.impute.ridge_lambda);
  }
  if (j.contains("smote")) {
    cfg.smote.k_neighbors = j["smote"].value("k_neighbors", cfg.smote.k_neighbors);
    cfg.smote.target_ratio = j["smote"].value("target_ratio", cfg.smote.target_ratio);
  }
  if (j.contains("logistic")) {
    cfg.logistic.l2_lambda = j["logistic"].value("l2_lambda", cfg.logistic.l2_lambda);
    cfg.logistic.max_iters = j["logistic"].value("max_iters", cfg.logistic.max_iters);
    cfg.logistic.tol = j["logistic"].value("tol", cfg.logistic.tol);
  }
  cfg.knn_k = j.value("knn_k", cfg.knn_k);
  cfg.sage_hidden_dim = j.value("sage_hidden_dim", cfg.sage_hidden_dim);
  cfg.sage_num_layers = j.value("sage_num_layers", cfg.sage_num_layers);
  cfg.split_fraction = j.value("split_fraction", cfg.split_fraction);
  cfg.val_fraction = j.value("val_fraction", cfg.val_fraction);
  cfg.weight_floor = j.value("weight_floor", cfg.weight_floor);
  if (j.contains("analysis")) {
    cfg.analysis_weight_floor = j["analysis"].value("weight_floor", cfg.analysis_weight_floor);
    cfg.lcc_cutoff = j["analysis"].value("lcc_cutoff", cfg.lcc_cutoff);
  }
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.master_seed = j.value("seed", cfg.master_seed);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const PipelineConfig& cfg) {
  json j;
  if (cfg.generator) j["generator"] = gen_to_json(*cfg.generator);
  if (cfg.patients_csv)
    j["inputs"] = {{"patients_csv", *cfg.patients_csv}, {"vitals_csv", *cfg.vitals_csv}};
  j["variant"] = cfg.variant;
  j["day"] = cfg.day;
  j["kernel"] = {{"k_train", cfg.k_train}, {"k_eval", cfg.k_eval}};
  if (cfg.alpha)
    j["kernel"]["alpha"] = *cfg.alpha;
  else
    j["kernel"]["alpha"] = "auto";
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"dropout", cfg.train.dropout},
                {"neighbor_sample_size", cfg.train.neighbor_sample_size},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience}};
  j["impute"] = {{"n_iterations", cfg.impute.n_iterations},
                 {"ridge_lambda", cfg.impute.ridge_lambda}};
  j["smote"] = {{"k_neighbors", cfg.smote.k_neighbors},
                {"target_ratio", cfg.smote.target_ratio}};
  j["logistic"] = {{"l2_lambda", cfg.logistic.l2_lambda},
                   {"max_iters", cfg.logistic.max_iters},
                   {"tol", cfg.logistic.tol}};
  j["knn_k"] = cfg.knn_k;
  j["sage_hidden_dim"] = cfg.sage_hidden_dim;
  j["sage_num_layers"] = cfg.sage_num_layers;
  j["split_fraction"] = cfg.split_fraction;
  j["val_fraction"] = cfg.val_fraction;
  j["weight_floor"] = cfg.weight_floor;
  j["analysis"] = {{"weight_floor", cfg.analysis_weight_floor},
                   {"lcc_cutoff", cfg.lcc_cutoff}};
  j["out_dir"] = cfg.out_dir;
  j["seed"] = cfg.master_seed;
  return j.dump(1);
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::uint64_t h = fnv1a64(config_to_json_text(cfg));
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << h;
  return out.str();
}

void validate_config(const PipelineConfig& cfg) {
  const bool has_gen = cfg.generator.has_value();
  const bool has_files = cfg.patients_csv.has_value();
  if (has_gen == has_files)
    throw ValidationError("config: exactly one of 'generator' and 'inputs' must be given");
  if (std::find(kVariants.begin(), kVariants.end(), cfg.variant) == kVariants.end())
    throw ValidationError("config: unknown variant '" + cfg.variant + "'");
  if (cfg.day < 1) throw ValidationError("config: day must be >= 1");
  if (cfg.k_train < 1 || cfg.k_eval < 1) throw ValidationError("config: k must be >= 1");
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
    throw ValidationError("config: split_fraction must lie in (0, 1)");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
    throw ValidationError("config: val_fraction must lie in (0, 1)");
  if (cfg.weight_floor < 0.0 || cfg.analysis_weight_floor < 0.0)
    throw ValidationError("config: weight floors must be >= 0");
  if (!(cfg.lcc_cutoff >= 0.0 && cfg.lcc_cutoff <= 1.0))
    throw ValidationError("config: lcc_cutoff must lie in [0, 1]");
  if (cfg.out_dir.empty()) throw ValidationError("config: out_dir must be set");
}

Cohort obtain_cohort(const PipelineConfig& cfg) {
  if (cfg.generator) {
    GenConfig g = *cfg.generator;
    if (!cfg.generator_seed_explicit) g.seed = mix_seed(cfg.master_seed, kSeedGenerator);
    return generate_synthetic_cohort(g);
  }
  return load_cohort(*cfg.vitals_csv, *cfg.patients_csv);
}

GraphBundle build_model_graph(const Matrix& standardized_vitals, int day,
                              const std::vector<std::string>& ids, int k,
                              std::optional<double> alpha, double weight_floor,
                              bool use_diffusion) {
  if (standardized_vitals.cols() != kNumVitals * static_cast<std::size_t>(day))
    throw ValidationError("pipeline: per-day feature width mismatch");
  GraphBundle bundle;
  std::vector<WeightedGraph> daily;
  for (int t = 1; t <= day; ++t) {
    Matrix slice(standardized_vitals.rows(), kNumVitals);
    for (std::size_t r = 0; r < standardized_vitals.rows(); ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v)
        slice(r, v) = standardized_vitals(r, (t - 1) * kNumVitals + v);
    std::string note;
    KernelConfig kc{k, alpha};
    daily.push_back(build_similarity_graph(slice, ids, kc, &note));
    if (!note.empty() && t == 1) bundle.notes.push_back(note);
  }
  if (use_diffusion) {
    std::vector<TransitionMatrix> transitions;
    transitions.reserve(daily.size());
    for (const auto& g : daily) transitions.push_back(transition(g));
    bundle.diffusion = diffusion_aggregate(transitions);
    bundle.sage = make_sage_graph(*bundle.diffusion, weight_floor);
  } else {
    bundle.mean_graph = aggregate_mean(daily);
    bundle.sage = make_sage_graph(*bundle.mean_graph, weight_floor);
  }
  return bundle;
}

GraphBundle build_inference_graph(const Matrix& train_vitals,
                                  const std::vector<std::string>& train_ids,
                                  const Matrix& new_vitals,
                                  const std::vector<std::string>& new_ids, int day, int k_train,
                                  int k_eval, std::optional<double> alpha, double weight_floor,
                                  bool use_diffusion) {
  const std::size_t n_train = train_vitals.rows(), n_new = new_vitals.rows();
  const std::size_t width = kNumVitals * static_cast<std::size_t>(day);
  if (train_vitals.cols() != width || new_vitals.cols() != width)
    throw ValidationError("pipeline: per-day feature width mismatch");

  std::vector<std::string> ids = train_ids;
  ids.insert(ids.end(), new_ids.begin(), new_ids.end());

  GraphBundle bundle;
  std::vector<WeightedGraph> daily;
  for (int t = 1; t <= day; ++t) {
    Matrix train_slice(n_train, kNumVitals), combined_slice(n_train + n_new, kNumVitals);
    for (std::size_t r = 0; r < n_train; ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v) {
        train_slice(r, v) = train_vitals(r, (t - 1) * kNumVitals + v);
        combined_slice(r, v) = train_slice(r, v);
      }
    for (std::size_t r = 0; r < n_new; ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v)
        combined_slice(n_train + r, v) = new_vitals(r, (t - 1) * kNumVitals + v);

    const int kt = std::min<int>(k_train, static_cast<int>(n_train) - 1);
    if (kt != k_train && t == 1)
      bundle.notes.push_back("pipeline: inference graph k_train clamped to " +
                             std::to_string(kt));
    auto edges = knn_edges(train_slice, kt);

    // wire each new node to its nearest neighbours in the whole population
    Matrix new_slice(n_new, kNumVitals);
    for (std::size_t r = 0; r < n_new; ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v)
        new_slice(r, v) = combined_slice(n_train + r, v);
    const int ke = std::min<int>(k_eval, static_cast<int>(n_train + n_new) - 1);
    if (ke != k_eval && t == 1)
      bundle.notes.push_back("pipeline: inference graph k_eval clamped to " +
                             std::to_string(ke));
    auto lists = kernels::knn_query(new_slice, combined_slice, ke + 1,
                                    /*exclude_diagonal=*/false);
    for (std::size_t r = 0; r < n_new; ++r) {
      const int self = static_cast<int>(n_train + r);
      int taken = 0;
      for (const auto& nb : lists[r]) {
        if (nb.index == self) continue;
        if (taken == ke) break;
        auto e = std::minmax(self, nb.index);
        edges.push_back({e.first, e.second});
        ++taken;
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const double a = alpha ? *alpha : auto_alpha(train_slice, kt);
    daily.push_back(gaussian_weights(combined_slice, ids, edges, a));
  }
  if (use_diffusion) {
    std::vector<TransitionMatrix> transitions;
    transitions.reserve(daily.size());
    for (const auto& g : daily) transitions.push_back(transition(g));
    bundle.diffusion = diffusion_aggregate(transitions);
    bundle.sage = make_sage_graph(*bundle.diffusion, weight_floor);
  } else {
    bundle.mean_graph = aggregate_mean(daily);
    bundle.sage = make_sage_graph(*bundle.mean_graph, weight_floor);
  }
  return bundle;
}

namespace {

struct ContinuousRow {
  std::string name;
  std::vector<double> severe;
  std::vector<double> nonsevere;
};

}  // namespace

std::string cohort_summary_table(const Cohort& cohort) {
  std::vector<const PatientRecord*> severe, nonsevere;
  for (const auto& p : cohort.patients)
    (p.outcome.kind == OutcomeKind::Transferred ? severe : nonsevere).push_back(&p);

  std::vector<ContinuousRow> rows;
  auto add_row = [&](const std::string& name, auto&& value_of) {
    ContinuousRow row;
    row.name = name;
    for (const auto* p : severe)
      if (auto v = value_of(*p)) row.severe.push_back(*v);
    for (const auto* p : nonsevere)
      if (auto v = value_of(*p)) row.nonsevere.push_back(*v);
    rows.push_back(std::move(row));
  };
  add_row("age",
          [](const PatientRecord& p) { return std::optional<double>(double(p.age)); });
  for (std::size_t v = 0; v < kNumVitals; ++v)
    add_row(kVitalNames[v],
            [v](const PatientRecord& p) { return first_three_day_mean(p, v); });
  add_row("length_of_stay",
          [](const PatientRecord& p) { return std::optional<double>(double(p.exit_day())); });

  auto mean_sd = [](const std::vector<double>& xs) {
    if (xs.empty()) return std::string("-");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    if (xs.size() < 2) return fmt_fixed(mean, 2) + " (-)";
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return fmt_fixed(mean, 2) + " (" + fmt_fixed(std::sqrt(sq / (xs.size() - 1.0)), 2) + ")";
  };

  std::ostringstream out;
  out << "covariate            non-severe (n=" << nonsevere.size() << ")  severe (n="
      << severe.size() << ")  p\n";
  auto emit = [&](const std::string& name, const std::string& ns, const std::string& sv,
                  const std::string& p) {
    out << std::left << std::setw(20) << name << ' ' << std::setw(22) << ns << std::setw(18)
        << sv << p << "\n";
  };
  for (const auto& row : rows) {
    std::string p = "-";
    if (!row.severe.empty() && !row.nonsevere.empty())
      p = fmt_g(rank_sum(row.severe, row.nonsevere).p);
    emit(row.name, mean_sd(row.nonsevere), mean_sd(row.severe), p);
  }
  // categorical counts without tests
  auto count_pct = [](std::size_t count, std::size_t total) {
    if (total == 0) return std::string("-");
    return std::to_string(count) + " (" + fmt_fixed(100.0 * count / total, 1) + "%)";
  };
  std::size_t f_ns = 0, f_sv = 0;
  for (const auto* p : nonsevere) f_ns += p->gender == Gender::Female;
  for (const auto* p : severe) f_sv += p->gender == Gender::Female;
  emit("female", count_pct(f_ns, nonsevere.size()), count_pct(f_sv, severe.size()), "-");
  for (std::size_t c = 0; c < kNumComorbidities; ++c) {
    std::size_t c_ns = 0, c_sv = 0;
    for (const auto* p : nonsevere) c_ns += p->comorbidities[c];
    for (const auto* p : severe) c_sv += p->comorbidities[c];
    emit(kComorbidityNames[c], count_pct(c_ns, nonsevere.size()),
         count_pct(c_sv, severe.size()), "-");
  }
  return out.str();
}

void cmd_generate(const PipelineConfig& cfg, std::ostream& out) {
  if (!cfg.generator)
    throw ValidationError("generate: config must contain a 'generator' section");
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);
  const Cohort cohort = obtain_cohort(cfg);
  const std::string patients = (fs::path(cfg.out_dir) / "patients.csv").string();
  const std::string vitals = (fs::path(cfg.out_dir) / "vitals.csv").string();
  write_cohort_csv(cohort, patients, vitals);
  out << "wrote " << patients << " and " << vitals << " (" << cohort.patients.size()
      << " patients)\n\n";
  out << cohort_summary_table(cohort);
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(rows[r], c);
  return out;
}

Matrix drop_last_column(const Matrix& x) {
  Matrix out(x.rows(), x.cols() - 1);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c + 1 < x.cols(); ++c) out(r, c) = x(r, c);
  return out;
}

void write_text_artifact(const std::string& path, const std::string& hash,
                         const std::string& body) {
  std::ofstream out(path);
  if (!out) throw PipelineError("pipeline: cannot write " + path);
  out << "# config_hash=" << hash << "\n" << body;
}

}  // namespace

RunOutput cmd_run(const PipelineConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  const std::string hash = config_hash(cfg);
  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);
  RunOutput run;
  run.hash = hash;

  const Cohort cohort = obtain_cohort(cfg);
  log << "cohort: " << cohort.patients.size() << " patients, max day " << cohort.max_day()
      << "\n";

  ImputeConfig icfg = cfg.impute;
  icfg.seed = mix_seed(cfg.master_seed, kSeedImpute);
  std::vector<std::string> impute_log;
  const auto panels = impute_day_panels(cohort, cfg.day, icfg, &impute_log);
  {
    std::string body;
    for (const auto& line : impute_log) body += line + "\n";
    const std::string path = (out_dir / "impute_log.txt").string();
    write_text_artifact(path, hash, body);
    run.artifact_paths.push_back(path);
  }

  const RiskSet rs = risk_set(cohort, cfg.day, panels);
  std::size_t n_pos = 0;
  for (int y : rs.labels) n_pos += y != 0;
  log << "risk set day " << cfg.day << ": n=" << rs.ids.size() << ", positives=" << n_pos
      << "\n";

  const SplitResult split =
      stratified_split(rs.labels, cfg.split_fraction, mix_seed(cfg.master_seed, kSeedSplit));

  // vitals for days 1..T plus age as the last column
  const std::size_t n = rs.ids.size();
  const std::size_t vit_cols = kNumVitals * cfg.day;
  Matrix assembled(n, vit_cols + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < vit_cols; ++c) assembled(r, c) = rs.features(r, c);
    assembled(r, vit_cols) = static_cast<double>(cohort.patients[rs.patient_rows[r]].age);
  }
  const Standardizer standardizer = fit_standardizer(gather_rows(assembled, split.train));
  const Matrix xs = apply_standardizer(standardizer, assembled);

  // early-stopping validation: a stratified carve-out of the real training
  // partition, held out of SMOTE so it measures generalization
  std::vector<int> train_partition_labels;
  for (int r : split.train) train_partition_labels.push_back(rs.labels[r]);
  const SplitResult carve = stratified_split(train_partition_labels, 1.0 - cfg.val_fraction,
                                             mix_seed(cfg.master_seed, kSeedValSplit));
  std::vector<int> fit_rows, val_rows;
  for (int i : carve.train) fit_rows.push_back(split.train[i]);
  for (int i : carve.test) val_rows.push_back(split.train[i]);

  SmoteConfig scfg = cfg.smote;
  scfg.seed = mix_seed(cfg.master_seed, kSeedSmote);
  std::vector<int> fit_labels_raw;
  for (int r : fit_rows) fit_labels_raw.push_back(rs.labels[r]);
  const SmoteResult sm = smote(gather_rows(xs, fit_rows), fit_labels_raw, scfg);
  for (const auto& note : sm.notes) log << note << "\n";
  log << "smote: " << sm.n_synthetic << " synthetic rows\n";

  // training universe: fit rows, synthetic rows, then validation rows
  const std::size_t n_fit = fit_rows.size(), n_syn = sm.n_synthetic, n_val = val_rows.size();
  std::vector<std::string> train_ids;
  for (int r : fit_rows) train_ids.push_back(rs.ids[r]);
  for (std::size_t s = 0; s < n_syn; ++s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "smote_%05zu", s + 1);
    train_ids.push_back(buf);
  }
  for (int r : val_rows) train_ids.push_back(rs.ids[r]);

  Matrix train_x(n_fit + n_syn + n_val, xs.cols());
  std::vector<int> train_node_labels;
  for (std::size_t r = 0; r < n_fit + n_syn; ++r) {
    for (std::size_t c = 0; c < xs.cols(); ++c) train_x(r, c) = sm.features(r, c);
    train_node_labels.push_back(sm.labels[r]);
  }
  for (std::size_t i = 0; i < n_val; ++i) {
    for (std::size_t c = 0; c < xs.cols(); ++c)
      train_x(n_fit + n_syn + i, c) = xs(val_rows[i], c);
    train_node_labels.push_back(rs.labels[val_rows[i]]);
  }
  std::vector<int> train_nodes(n_fit + n_syn), val_nodes(n_val);
  for (std::size_t i = 0; i < n_fit + n_syn; ++i) train_nodes[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < n_val; ++i) val_nodes[i] = static_cast<int>(n_fit + n_syn + i);
  std::vector<int> val_labels;
  for (int r : val_rows) val_labels.push_back(rs.labels[r]);
  log << "training nodes: " << n_fit << " real + " << n_syn << " synthetic, " << n_val
      << " validation\n";
  std::vector<int> test_labels;
  for (int r : split.test) test_labels.push_back(rs.labels[r]);
  std::vector<std::string> test_ids;
  for (int r : split.test) test_ids.push_back(rs.ids[r]);
  const Matrix test_x = gather_rows(xs, split.test);

  const bool is_gcn = cfg.variant == "knn-gcn" || cfg.variant == "diffusion-gcn" ||
                      cfg.variant == "diffusion-gcn-age";
  std::vector<double> test_scores, val_scores;

  if (is_gcn) {
    const bool use_diffusion = cfg.variant != "knn-gcn";
    const bool use_age = cfg.variant == "diffusion-gcn-age";

    const Matrix train_vitals = drop_last_column(train_x);
    GraphBundle gtrain = build_model_graph(train_vitals, cfg.day, train_ids, cfg.k_train,
                                           cfg.alpha, cfg.weight_floor, use_diffusion);
    for (const auto& note : gtrain.notes) log << "train graph: " << note << "\n";

    const Matrix& model_train_x = use_age ? train_x : train_vitals;
    SageArch arch;
    arch.input_dim = static_cast<int>(model_train_x.cols());
    arch.hidden_dim = cfg.sage_hidden_dim;
    arch.num_layers = cfg.sage_num_layers;
    TrainConfig tcfg = cfg.train;
    tcfg.seed = mix_seed(cfg.master_seed, kSeedTrain);

    const TrainedModel model = fit(gtrain.sage, model_train_x, train_node_labels,
                                   {train_nodes, val_nodes}, arch, tcfg);
    log << "fit: best epoch " << model.best_epoch << " of " << model.history.size() << "\n";
    val_scores = predict(model, gtrain.sage, model_train_x, val_nodes);

    // inference: test nodes wired into the (frozen) training graph
    const Matrix test_vitals = drop_last_column(test_x);
    GraphBundle gtest =
        build_inference_graph(train_vitals, train_ids, test_vitals, test_ids, cfg.day,
                              cfg.k_train, cfg.k_eval, cfg.alpha, cfg.weight_floor,
                              use_diffusion);
    for (const auto& note : gtest.notes) log << "eval graph: " << note << "\n";
    Matrix inference_x(train_x.rows() + test_x.rows(),
                       use_age ? train_x.cols() : train_vitals.cols());
    {
      const Matrix& train_feats = use_age ? train_x : train_vitals;
      const Matrix& test_feats = use_age ? test_x : test_vitals;
      for (std::size_t r = 0; r < train_feats.rows(); ++r)
        for (std::size_t c = 0; c < train_feats.cols(); ++c)
          inference_x(r, c) = train_feats(r, c);
      for (std::size_t r = 0; r < test_feats.rows(); ++r)
        for (std::size_t c = 0; c < test_feats.cols(); ++c)
          inference_x(train_feats.rows() + r, c) = test_feats(r, c);
    }
    std::vector<int> test_nodes(test_ids.size());
    for (std::size_t i = 0; i < test_nodes.size(); ++i)
      test_nodes[i] = static_cast<int>(train_x.rows() + i);
    test_scores = predict(model, gtest.sage, inference_x, test_nodes);

    const std::string ckpt = (out_dir / "checkpoint.json").string();
    {
      // wrap the model checkpoint with run identification
      save_model(model, ckpt);
      std::ifstream in(ckpt);
      json j;
      in >> j;
      in.close();
      j["config_hash"] = hash;
      j["variant"] = cfg.variant;
      std::ofstream out(ckpt);
      out << j.dump(1) << '\n';
    }
    run.artifact_paths.push_back(ckpt);

    const std::string train_graph_path = (out_dir / "graph_train.csv").string();
    const std::string eval_graph_path = (out_dir / "graph_eval.csv").string();
    if (use_diffusion) {
      write_edge_list(train_graph_path, *gtrain.diffusion, cfg.weight_floor, hash);
      write_edge_list(eval_graph_path, *gtest.diffusion, cfg.weight_floor, hash);
    } else {
      write_edge_list(train_graph_path, *gtrain.mean_graph, hash);
      write_edge_list(eval_graph_path, *gtest.mean_graph, hash);
    }
    run.artifact_paths.push_back(train_graph_path);
    run.artifact_paths.push_back(eval_graph_path);
  } else {
    // flat baselines on the concatenated per-day vitals
    const Matrix fit_x = drop_last_column(gather_rows(train_x, train_nodes));
    std::vector<int> fit_labels;
    for (int v : train_nodes) fit_labels.push_back(train_node_labels[v]);
    const Matrix val_x = drop_last_column(gather_rows(train_x, val_nodes));
    const Matrix test_vitals = drop_last_column(test_x);
    if (cfg.variant == "logistic") {
      const LogisticModel model = logistic_fit(fit_x, fit_labels, cfg.logistic);
      log << "logistic: " << model.iterations << " iterations, |grad|=" << model.gradient_norm
          << "\n";
      val_scores = logistic_predict(model, val_x);
      test_scores = logistic_predict(model, test_vitals);
      json j = {{"format", "riskgraph-checkpoint-v1"},
                {"model", "logistic"},
                {"config_hash", hash},
                {"weights", model.weights},
                {"bias", model.bias},
                {"l2_lambda", model.l2_lambda}};
      const std::string ckpt = (out_dir / "checkpoint.json").string();
      std::ofstream out(ckpt);
      out << j.dump(1) << '\n';
      run.artifact_paths.push_back(ckpt);
    } else {
      const int k = std::min<int>(cfg.knn_k, static_cast<int>(fit_x.rows()));
      const KnnModel model = knn_fit(fit_x, fit_labels, k);
      val_scores = knn_predict(model, val_x);
      test_scores = knn_predict(model, test_vitals);
      json j = {{"format", "riskgraph-checkpoint-v1"},
                {"model", "knn"},
                {"config_hash", hash},
                {"k", model.k},
                {"labels", model.labels},
                {"train_rows", model.train.rows()},
                {"train_cols", model.train.cols()},
                {"train_data", model.train.data()}};
      const std::string ckpt = (out_dir / "checkpoint.json").string();
      std::ofstream out(ckpt);
      out << j.dump(1) << '\n';
      run.artifact_paths.push_back(ckpt);
    }
  }

  // operating threshold picked on validation data only
  double threshold = 0.5;
  bool val_has_both = false;
  {
    bool pos = false, neg = false;
    for (int y : val_labels) (y != 0 ? pos : neg) = true;
    val_has_both = pos && neg;
  }
  if (val_has_both)
    threshold = youden_threshold(val_scores, val_labels);
  else
    log << "warning: validation set has one class, using threshold 0.5\n";

  run.report = evaluate(cfg.day, cfg.variant, test_scores, test_labels, threshold);

  // analysis graph: diffusion accumulation over the whole (unaugmented) risk set
  {
    GraphBundle gfull = build_model_graph(drop_last_column(xs), cfg.day, rs.ids, cfg.k_train,
                                          cfg.alpha, cfg.weight_floor, /*use_diffusion=*/true);
    const std::string full_path = (out_dir / "graph_full.csv").string();
    write_edge_list(full_path, *gfull.diffusion, cfg.analysis_weight_floor, hash);
    run.artifact_paths.push_back(full_path);
    std::string nodes_body;
    for (const auto& id : rs.ids) nodes_body += id + "\n";
    const std::string nodes_path = (out_dir / "graph_full_nodes.txt").string();
    write_text_artifact(nodes_path, hash, nodes_body);
    run.artifact_paths.push_back(nodes_path);
  }

  {
    std::string body;
    for (std::size_t i = 0; i < test_ids.size(); ++i)
      body += test_ids[i] + "," + fmt_g(test_scores[i]) + "," + std::to_string(test_labels[i]) +
              "\n";
    const std::string path = (out_dir / "predictions.csv").string();
    write_text_artifact(path, hash, "id,score,label\n" + body);
    run.artifact_paths.push_back(path);
  }

  const std::string roc_path = (out_dir / "roc.csv").string();
  write_roc_csv(roc_path, run.report, hash);
  run.artifact_paths.push_back(roc_path);

  run.report_path = (out_dir / "report.txt").string();
  write_text_artifact(run.report_path, hash, report_line(run.report) + "\n");
  run.artifact_paths.push_back(run.report_path);
  log << report_line(run.report) << "\n";
  return run;
}

void cmd_analyze(const PipelineConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  const std::string hash = config_hash(cfg);
  const fs::path out_dir(cfg.out_dir);
  const std::string graph_path = (out_dir / "graph_full.csv").string();
  const std::string nodes_path = (out_dir / "graph_full_nodes.txt").string();
  if (!fs::exists(graph_path) || !fs::exists(nodes_path))
    throw ValidationError("analyze: run artifacts not found in " + cfg.out_dir +
                          " (run the 'run' command first)");

  std::vector<std::string> node_ids;
  {
    std::ifstream in(nodes_path);
    std::string line;
    while (std::getline(in, line)) {
      const std::string id = trim(line);
      if (!id.empty() && id[0] != '#') node_ids.push_back(id);
    }
  }
  const DiffusionGraph graph = read_edge_list(graph_path, node_ids);
  const Cohort cohort = obtain_cohort(cfg);

  const std::vector<double> lcc_values = lcc(graph, cfg.analysis_weight_floor);
  const LccClusters clusters = lcc_cluster(lcc_values, cfg.lcc_cutoff);
  log << "lcc: " << graph.node_ids.size() << " nodes, " << clusters.high_risk.size()
      << " high-risk at cutoff " << cfg.lcc_cutoff << "\n";

  std::vector<bool> membership(cohort.patients.size(), false);
  for (int v : clusters.high_risk) {
    const int idx = cohort.index_of(graph.node_ids[v]);
    if (idx >= 0) membership[idx] = true;
  }

  const ClusterReport report =
      cluster_summary(cohort, membership, graph.node_ids, lcc_values, cfg.lcc_cutoff);
  if (report.high_risk_empty)
    log << "warning: no nodes exceed the LCC cutoff; high-risk cluster is empty\n";

  write_text_artifact((out_dir / "cluster_summary.txt").string(), hash,
                      cluster_report_text(report));

  {
    // histogram-ready per-node coefficients with ground-truth outcome flags
    std::string body = "node_id,lcc,transferred\n";
    for (std::size_t v = 0; v < graph.node_ids.size(); ++v) {
      const int idx = cohort.index_of(graph.node_ids[v]);
      const bool transferred =
          idx >= 0 && cohort.patients[idx].outcome.kind == OutcomeKind::Transferred;
      body += graph.node_ids[v] + "," + fmt_g(lcc_values[v]) + "," +
              (transferred ? "1" : "0") + "\n";
    }
    write_text_artifact((out_dir / "lcc_values.csv").string(), hash, body);
  }

  write_km_csv((out_dir / "km_high_risk.csv").string(), report.km_high_risk, hash);
  write_km_csv((out_dir / "km_other.csv").string(), report.km_other, hash);
  log << "analysis artifacts written to " << cfg.out_dir << "\n";
}

void cmd_report(const std::vector<std::string>& out_dirs, std::ostream& out) {
  if (out_dirs.empty()) throw ValidationError("report: give at least one run directory");
  struct Row {
    int day;
    std::string model, auc, sen, spe, threshold;
  };
  std::vector<Row> rows;
  for (const auto& dir : out_dirs) {
    const fs::path path = fs::path(dir) / "report.txt";
    std::ifstream in(path);
    if (!in) throw ValidationError("report: cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::map<std::string, std::string> kv;
      std::istringstream ss(line);
      std::string token;
      while (ss >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) kv[token.substr(0, eq)] = token.substr(eq + 1);
      }
      if (!kv.count("day")) continue;
      rows.push_back({std::stoi(kv["day"]), kv["model"], kv["auc"], kv["sensitivity"],
                      kv["specificity"], kv["threshold"]});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.day != b.day) return a.day < b.day;
    return a.model < b.model;
  });
  out << std::left << std::setw(5) << "day" << std::setw(20) << "model" << std::setw(10) << "auc"
      << std::setw(13) << "sensitivity" << std::setw(13) << "specificity" << "threshold\n";
  for (const auto& r : rows)
    out << std::left << std::setw(5) << r.day << std::setw(20) << r.model << std::setw(10)
        << r.auc << std::setw(13) << r.sen << std::setw(13) << r.spe << r.threshold << "\n";
}

}  // namespace riskgraph
