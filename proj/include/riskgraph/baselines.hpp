#pragma once

#include <vector>

#include "riskgraph/matrix.hpp"

namespace riskgraph {

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 1e-3;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct LogisticConfig {
  double l2_lambda = 1e-3;
  int max_iters = 1000;
  double tol = 1e-6;  // on the gradient norm of the mean penalized log-likelihood
};

// Gradient ascent with backtracking line search on the mean L2-penalized
// log-likelihood (bias unpenalized); deterministic from the given start.
LogisticModel logistic_fit(const Matrix& x, const std::vector<int>& y,
                           const LogisticConfig& cfg = {},
                           const std::vector<double>* initial_weights = nullptr,
                           double initial_bias = 0.0);

std::vector<double> logistic_predict(const LogisticModel& model, const Matrix& x);

struct KnnModel {
  Matrix train;
  std::vector<int> labels;
  int k = 5;
};

KnnModel knn_fit(const Matrix& x, const std::vector<int>& y, int k);

// positive fraction among the k nearest training rows (Euclidean metric,
// distance ties broken by training-row index)
std::vector<double> knn_predict(const KnnModel& model, const Matrix& x);

}  // namespace riskgraph
