#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/cohort.hpp"
#include "riskgraph/matrix.hpp"

namespace riskgraph {

struct ImputeConfig {
  int n_iterations = 10;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;
};

struct MiceResult {
  Matrix completed;
  // one line per imputed column per iteration, with the fit residual norm
  std::vector<std::string> diagnostics;
};

// Chained-equations imputation: each incomplete column is regressed on the
// other columns (ridge-regularized, intercept unpenalized) and its missing
// entries replaced by predictions, sweeping columns for n_iterations rounds.
// column_days[j] gives the day each column belongs to; the regressors for a
// column of day d are restricted to columns of days <= d. Observed entries
// are never modified.
MiceResult mice_impute(const Matrix& with_missing, const std::vector<int>& column_days,
                       const ImputeConfig& cfg);

// single-day convenience: all columns may regress on each other
MiceResult mice_impute(const Matrix& with_missing, const ImputeConfig& cfg);

// Imputes the cohort's day panels in day order: the day-t pass stacks the
// already-completed columns of days < t (restricted to the day-t population)
// with the raw day-t columns, so day-t values are only ever predicted from
// data of days <= t.
std::vector<DayPanel> impute_day_panels(const Cohort& cohort, int up_to_day,
                                        const ImputeConfig& cfg,
                                        std::vector<std::string>* diagnostics = nullptr);

struct SmoteConfig {
  int k_neighbors = 5;
  double target_ratio = 1.0;  // desired minority/majority count ratio
  std::uint64_t seed = 0;
};

struct SmoteResult {
  Matrix features;         // original rows first, synthetic rows appended
  std::vector<int> labels;
  std::size_t n_synthetic = 0;
  std::vector<std::string> notes;
};

// Minority oversampling: each synthetic row is x + lambda * (neighbor - x)
// for a random minority row x, one of its k nearest minority neighbours, and
// lambda uniform on [0, 1].
SmoteResult smote(const Matrix& features, const std::vector<int>& labels,
                  const SmoteConfig& cfg);

// the interpolation step by itself
std::vector<double> smote_interpolate(std::span<const double> x, std::span<const double> neighbor,
                                      double lambda);

struct SplitResult {
  std::vector<int> train;  // ascending row indices
  std::vector<int> test;
};

// Per-class counts are split as round(class_count * train_fraction), half up.
SplitResult stratified_split(const std::vector<int>& labels, double train_fraction,
                             std::uint64_t seed);

struct IdSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// id-keyed convenience over the index-based split
IdSplit stratified_split(const std::vector<std::string>& ids, const std::vector<int>& labels,
                         double train_fraction, std::uint64_t seed);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;  // population sd; zero-variance columns map to 0
};

Standardizer fit_standardizer(const Matrix& train);
Matrix apply_standardizer(const Standardizer& s, const Matrix& x);

}  // namespace riskgraph
