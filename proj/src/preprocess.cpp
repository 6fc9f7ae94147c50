#include "riskgraph/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "riskgraph/error.hpp"
#include "riskgraph/kernels.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cholesky solve of a symmetric positive-definite system; nullopt when the
// factorization breaks down (singular or indefinite).
std::optional<std::vector<double>> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / ljj;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * b[k];
    b[ii] = v / a[ii * n + ii];
  }
  for (double v : b)
    if (!std::isfinite(v)) return std::nullopt;
  return b;
}

double column_mean_observed(const Matrix& m, std::size_t col) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!std::isnan(m(r, col))) {
      sum += m(r, col);
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

}  // namespace

MiceResult mice_impute(const Matrix& with_missing, const std::vector<int>& column_days,
                       const ImputeConfig& cfg) {
  const std::size_t n = with_missing.rows(), p = with_missing.cols();
  if (n == 0 || p == 0) throw ValidationError("preprocess: mice input is empty");
  if (column_days.size() != p)
    throw ValidationError("preprocess: column_days size does not match column count");
  if (cfg.n_iterations < 1) throw ValidationError("preprocess: n_iterations must be >= 1");
  if (cfg.ridge_lambda < 0.0) throw ValidationError("preprocess: ridge_lambda must be >= 0");

  std::vector<std::vector<std::size_t>> missing_rows(p);
  for (std::size_t c = 0; c < p; ++c)
    for (std::size_t r = 0; r < n; ++r)
      if (std::isnan(with_missing(r, c))) missing_rows[c].push_back(r);

  MiceResult result;
  result.completed = with_missing;
  Matrix& x = result.completed;

  bool any_missing = false;
  for (std::size_t c = 0; c < p; ++c) any_missing = any_missing || !missing_rows[c].empty();
  if (!any_missing) return result;  // complete input passes through untouched

  // preconditions only bind once something actually needs imputing
  for (std::size_t c = 0; c < p; ++c) {
    if (missing_rows[c].empty()) continue;
    const std::size_t observed = n - missing_rows[c].size();
    if (observed == 0)
      throw ValidationError("preprocess: column " + std::to_string(c) + " is entirely missing");
    if (observed < 2)
      throw ValidationError("preprocess: column " + std::to_string(c) +
                            " has fewer than 2 observed values");
  }
  for (std::size_t r = 0; r < n; ++r) {
    bool any = false;
    for (std::size_t c = 0; c < p && !any; ++c) any = !std::isnan(with_missing(r, c));
    if (!any)
      throw ValidationError("preprocess: row " + std::to_string(r) + " is entirely missing");
  }

  for (std::size_t c = 0; c < p; ++c) {
    if (missing_rows[c].empty()) continue;
    const double mean = column_mean_observed(with_missing, c);
    for (std::size_t r : missing_rows[c]) x(r, c) = mean;
  }

  for (int iter = 1; iter <= cfg.n_iterations; ++iter) {
    for (std::size_t c = 0; c < p; ++c) {
      if (missing_rows[c].empty()) continue;

      std::vector<std::size_t> regressors;
      for (std::size_t j = 0; j < p; ++j)
        if (j != c && column_days[j] <= column_days[c]) regressors.push_back(j);

      std::vector<std::size_t> observed;
      for (std::size_t r = 0; r < n; ++r)
        if (!std::isnan(with_missing(r, c))) observed.push_back(r);

      auto fallback = [&](const char* reason) {
        const double mean = column_mean_observed(with_missing, c);
        for (std::size_t r : missing_rows[c]) x(r, c) = mean;
        result.diagnostics.push_back("mice iter=" + std::to_string(iter) + " col=" +
                                     std::to_string(c) + " fallback=column-mean reason=" + reason);
      };

      if (regressors.empty() || observed.size() <= regressors.size() + 1) {
        fallback(regressors.empty() ? "no-eligible-regressors" : "too-few-observed-rows");
        continue;
      }

      // normal equations for [intercept | regressors]
      const std::size_t d = regressors.size() + 1;
      std::vector<double> ata(d * d, 0.0), atb(d, 0.0);
      std::vector<double> row(d, 1.0);
      for (std::size_t r : observed) {
        for (std::size_t j = 0; j < regressors.size(); ++j) row[j + 1] = x(r, regressors[j]);
        const double y = with_missing(r, c);
        for (std::size_t i = 0; i < d; ++i) {
          atb[i] += row[i] * y;
          for (std::size_t j = 0; j <= i; ++j) ata[i * d + j] += row[i] * row[j];
        }
      }
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) ata[i * d + j] = ata[j * d + i];
      for (std::size_t i = 1; i < d; ++i) ata[i * d + i] += cfg.ridge_lambda;  // intercept free

      auto beta = solve_spd(ata, atb);
      if (!beta) {
        fallback("singular-system");
        continue;
      }

      double rss = 0.0;
      for (std::size_t r : observed) {
        double pred = (*beta)[0];
        for (std::size_t j = 0; j < regressors.size(); ++j)
          pred += (*beta)[j + 1] * x(r, regressors[j]);
        const double e = with_missing(r, c) - pred;
        rss += e * e;
      }
      result.diagnostics.push_back("mice iter=" + std::to_string(iter) + " col=" +
                                   std::to_string(c) + " n_obs=" +
                                   std::to_string(observed.size()) +
                                   " residual=" + fmt_g(std::sqrt(rss)));

      for (std::size_t r : missing_rows[c]) {
        double pred = (*beta)[0];
        for (std::size_t j = 0; j < regressors.size(); ++j)
          pred += (*beta)[j + 1] * x(r, regressors[j]);
        x(r, c) = pred;
      }
    }
  }
  return result;
}

MiceResult mice_impute(const Matrix& with_missing, const ImputeConfig& cfg) {
  return mice_impute(with_missing, std::vector<int>(with_missing.cols(), 1), cfg);
}

std::vector<DayPanel> impute_day_panels(const Cohort& cohort, int up_to_day,
                                        const ImputeConfig& cfg,
                                        std::vector<std::string>* diagnostics) {
  if (up_to_day < 1 || up_to_day > cohort.max_day())
    throw ValidationError("preprocess: up_to_day out of range");
  auto panels = raw_day_panels(cohort);
  panels.resize(up_to_day);

  std::vector<DayPanel> completed;
  for (int day = 1; day <= up_to_day; ++day) {
    const DayPanel& raw = panels[day - 1];
    const std::size_t rows = raw.patient_rows.size();

    // stack completed columns of earlier days (restricted to today's rows)
    // in front of today's raw columns
    Matrix stacked(rows, kNumVitals * day, kNaN);
    std::vector<int> column_days(kNumVitals * day);
    for (int t = 1; t < day; ++t) {
      const DayPanel& prev = completed[t - 1];
      std::map<int, int> prev_row;
      for (std::size_t r = 0; r < prev.patient_rows.size(); ++r)
        prev_row[prev.patient_rows[r]] = static_cast<int>(r);
      for (std::size_t r = 0; r < rows; ++r) {
        const int pr = prev_row.at(raw.patient_rows[r]);
        for (std::size_t v = 0; v < kNumVitals; ++v)
          stacked(r, (t - 1) * kNumVitals + v) = prev.values(pr, v);
      }
    }
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v)
        stacked(r, (day - 1) * kNumVitals + v) = raw.values(r, v);
    for (int t = 1; t <= day; ++t)
      for (std::size_t v = 0; v < kNumVitals; ++v) column_days[(t - 1) * kNumVitals + v] = t;

    MiceResult mr = mice_impute(stacked, column_days, cfg);
    if (diagnostics)
      for (const auto& line : mr.diagnostics)
        diagnostics->push_back("day=" + std::to_string(day) + " " + line);

    DayPanel out;
    out.day = day;
    out.patient_rows = raw.patient_rows;
    out.values = Matrix(rows, kNumVitals);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t v = 0; v < kNumVitals; ++v)
        out.values(r, v) = mr.completed(r, (day - 1) * kNumVitals + v);
    completed.push_back(std::move(out));
  }
  return completed;
}

std::vector<double> smote_interpolate(std::span<const double> x, std::span<const double> neighbor,
                                      double lambda) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + lambda * (neighbor[i] - x[i]);
  return out;
}

SmoteResult smote(const Matrix& features, const std::vector<int>& labels,
                  const SmoteConfig& cfg) {
  const std::size_t n = features.rows();
  if (labels.size() != n) throw ValidationError("preprocess: smote labels/features mismatch");
  if (cfg.k_neighbors < 1) throw ValidationError("preprocess: smote k_neighbors must be >= 1");
  if (!(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0))
    throw ValidationError("preprocess: smote target_ratio must lie in (0, 1]");

  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  const std::size_t n_neg = n - n_pos;
  const bool minority_is_positive = n_pos <= n_neg;
  const int minority_label = minority_is_positive ? 1 : 0;
  const std::size_t n_min = minority_is_positive ? n_pos : n_neg;
  const std::size_t n_maj = n - n_min;

  if (n_min < 2)
    throw ValidationError("preprocess: smote needs a minority class of size >= 2, got " +
                          std::to_string(n_min));

  SmoteResult result;
  result.features = features;
  result.labels = labels;

  const std::size_t wanted = static_cast<std::size_t>(
      std::ceil(cfg.target_ratio * static_cast<double>(n_maj)));
  if (wanted <= n_min) return result;
  const std::size_t n_new = wanted - n_min;

  std::vector<int> minority_rows;
  for (std::size_t i = 0; i < n; ++i)
    if ((labels[i] != 0 ? 1 : 0) == minority_label) minority_rows.push_back(static_cast<int>(i));

  Matrix minority(minority_rows.size(), features.cols());
  for (std::size_t r = 0; r < minority_rows.size(); ++r)
    for (std::size_t c = 0; c < features.cols(); ++c)
      minority(r, c) = features(minority_rows[r], c);

  int k = cfg.k_neighbors;
  if (static_cast<std::size_t>(k) >= n_min) {
    k = static_cast<int>(n_min) - 1;
    result.notes.push_back("smote: k_neighbors clamped to " + std::to_string(k) +
                           " (minority size " + std::to_string(n_min) + ")");
  }
  auto neighbor_lists = kernels::knn_query(minority, minority, k, /*exclude_diagonal=*/true);

  Matrix grown(n + n_new, features.cols());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < features.cols(); ++c) grown(r, c) = features(r, c);

  Rng rng(mix_seed(cfg.seed, 0x5307e));
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t base = rng.below(minority.rows());
    const auto& cand = neighbor_lists[base];
    const std::size_t pick = cand[rng.below(cand.size())].index;
    const double lambda = rng.uniform01();
    for (std::size_t c = 0; c < features.cols(); ++c) {
      const double xv = minority(base, c);
      grown(n + s, c) = xv + lambda * (minority(pick, c) - xv);
    }
    result.labels.push_back(minority_label);
  }
  result.features = std::move(grown);
  result.n_synthetic = n_new;
  return result;
}

SplitResult stratified_split(const std::vector<int>& labels, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("preprocess: train_fraction must lie in (0, 1)");
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] != 0 ? pos : neg).push_back(static_cast<int>(i));
  if (pos.empty() || neg.empty())
    throw ValidationError("preprocess: stratified split needs both classes present");
  if (pos.size() < 2 || neg.size() < 2)
    throw ValidationError("preprocess: stratified split needs >= 2 members per class");

  Rng rng(mix_seed(seed, 0x59717));
  SplitResult out;
  int cls = 0;
  for (auto* group : {&neg, &pos}) {
    Rng grng = rng.fork(cls++);
    grng.shuffle(*group);
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(group->size()) * train_fraction + 0.5));
    for (std::size_t i = 0; i < group->size(); ++i)
      (i < n_train ? out.train : out.test).push_back((*group)[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

IdSplit stratified_split(const std::vector<std::string>& ids, const std::vector<int>& labels,
                         double train_fraction, std::uint64_t seed) {
  if (ids.size() != labels.size())
    throw ValidationError("preprocess: ids/labels size mismatch");
  const SplitResult by_index = stratified_split(labels, train_fraction, seed);
  IdSplit out;
  for (int i : by_index.train) out.train_ids.push_back(ids[i]);
  for (int i : by_index.test) out.test_ids.push_back(ids[i]);
  return out;
}

Standardizer fit_standardizer(const Matrix& train) {
  if (train.rows() == 0) throw ValidationError("preprocess: standardizer needs rows");
  const std::size_t p = train.cols();
  Standardizer s;
  s.mean.assign(p, 0.0);
  s.sd.assign(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) sum += train(r, c);
    const double mean = sum / static_cast<double>(train.rows());
    double sq = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double d = train(r, c) - mean;
      sq += d * d;
    }
    s.mean[c] = mean;
    s.sd[c] = std::sqrt(sq / static_cast<double>(train.rows()));
  }
  return s;
}

Matrix apply_standardizer(const Standardizer& s, const Matrix& x) {
  if (x.cols() != s.mean.size())
    throw ValidationError("preprocess: standardizer dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double mean = s.mean[c], sd = s.sd[c];
    for (std::size_t r = 0; r < x.rows(); ++r)
      out(r, c) = sd > 0.0 ? (x(r, c) - mean) / sd : 0.0;
  }
  return out;
}

}  // namespace riskgraph
