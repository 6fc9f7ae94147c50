#include "riskgraph/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "riskgraph/error.hpp"
#include "riskgraph/kernels.hpp"

namespace riskgraph {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// numerically safe log(sigmoid(z)) and log(1 - sigmoid(z))
double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double objective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w,
                 double b, double lambda) {
  const std::size_t n = x.rows(), d = x.cols();
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
    ll += y[i] != 0 ? log_sigmoid(z) : log_sigmoid(-z);
  }
  ll /= static_cast<double>(n);
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return ll - 0.5 * lambda * penalty;
}

}  // namespace

LogisticModel logistic_fit(const Matrix& x, const std::vector<int>& y, const LogisticConfig& cfg,
                           const std::vector<double>* initial_weights, double initial_bias) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || y.size() != n) throw ValidationError("baselines: logistic input mismatch");
  bool pos = false, neg = false;
  for (int yi : y) (yi != 0 ? pos : neg) = true;
  if (!pos || !neg)
    throw ValidationError("baselines: logistic regression needs both classes present");
  if (cfg.l2_lambda < 0.0) throw ValidationError("baselines: l2_lambda must be >= 0");

  LogisticModel model;
  model.l2_lambda = cfg.l2_lambda;
  model.weights.assign(d, 0.0);
  if (initial_weights) {
    if (initial_weights->size() != d)
      throw ValidationError("baselines: initial weight dimension mismatch");
    model.weights = *initial_weights;
  }
  model.bias = initial_bias;

  double step = 1.0;
  double current = objective(x, y, model.weights, model.bias, cfg.l2_lambda);
  std::vector<double> grad_w(d);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = model.bias;
      const double* row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * row[j];
      const double r = (y[i] != 0 ? 1.0 : 0.0) - sigmoid(z);
      grad_b += r;
      for (std::size_t j = 0; j < d; ++j) grad_w[j] += r * row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    grad_b *= inv_n;
    double norm_sq = grad_b * grad_b;
    for (std::size_t j = 0; j < d; ++j) {
      grad_w[j] = grad_w[j] * inv_n - cfg.l2_lambda * model.weights[j];
      norm_sq += grad_w[j] * grad_w[j];
    }
    model.gradient_norm = std::sqrt(norm_sq);
    model.iterations = iter;
    if (model.gradient_norm <= cfg.tol) return model;

    // backtracking ascent with Armijo condition; grow the step on success
    step = std::min(step * 2.0, 1.0e4);
    while (true) {
      std::vector<double> w_next = model.weights;
      for (std::size_t j = 0; j < d; ++j) w_next[j] += step * grad_w[j];
      const double b_next = model.bias + step * grad_b;
      const double value = objective(x, y, w_next, b_next, cfg.l2_lambda);
      if (value >= current + 1e-4 * step * norm_sq) {
        model.weights = std::move(w_next);
        model.bias = b_next;
        current = value;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) return model;  // no ascent direction progress left
    }
  }
  return model;
}

std::vector<double> logistic_predict(const LogisticModel& model, const Matrix& x) {
  if (x.cols() != model.weights.size())
    throw ValidationError("baselines: logistic predict dimension mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = model.bias;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) z += model.weights[j] * row[j];
    out[i] = sigmoid(z);
  }
  return out;
}

KnnModel knn_fit(const Matrix& x, const std::vector<int>& y, int k) {
  if (x.rows() == 0) throw ValidationError("baselines: knn needs training rows");
  if (y.size() != x.rows()) throw ValidationError("baselines: knn labels mismatch");
  if (k < 1 || static_cast<std::size_t>(k) > x.rows())
    throw ValidationError("baselines: knn k must lie in [1, n_train]");
  return {x, y, k};
}

std::vector<double> knn_predict(const KnnModel& model, const Matrix& x) {
  if (model.train.rows() == 0) throw ValidationError("baselines: knn model is empty");
  if (x.cols() != model.train.cols())
    throw ValidationError("baselines: knn predict dimension mismatch");
  auto lists = kernels::knn_query(x, model.train, model.k, /*exclude_diagonal=*/false);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double positives = 0.0;
    for (const auto& nb : lists[i]) positives += model.labels[nb.index] != 0 ? 1.0 : 0.0;
    out[i] = positives / static_cast<double>(lists[i].size());
  }
  return out;
}

}  // namespace riskgraph
