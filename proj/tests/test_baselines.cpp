#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskgraph/baselines.hpp"
#include "riskgraph/error.hpp"
#include "riskgraph/eval.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;

namespace {

Matrix column(const std::vector<double>& xs) {
  Matrix m(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
  return m;
}

}  // namespace

TEST_CASE("logistic regression separates 1-d data") {
  std::vector<double> xs;
  std::vector<int> ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i < 10 ? -1.0 - 0.05 * i : 1.0 + 0.05 * i);
    ys.push_back(i < 10 ? 0 : 1);
  }
  const Matrix x = column(xs);
  const LogisticModel model = logistic_fit(x, ys);
  const auto probs = logistic_predict(model, x);
  CHECK(auc(probs, ys) == 1.0);
  for (double p : probs) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("zero-weight logistic model scores 0.5 everywhere") {
  LogisticModel zero;
  zero.weights = {0.0, 0.0};
  zero.bias = 0.0;
  Matrix x(3, 2);
  x(0, 0) = 5.0;
  x(1, 1) = -2.0;
  for (double p : logistic_predict(zero, x)) CHECK(p == 0.5);
}

TEST_CASE("logistic gradient norm reaches the tolerance") {
  Rng rng(6);
  Matrix x(60, 2);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) {
    y[i] = i % 2;
    x(i, 0) = rng.normal(y[i] ? 0.8 : -0.8);
    x(i, 1) = rng.normal();
  }
  const LogisticModel model = logistic_fit(x, y);
  CHECK(model.gradient_norm <= 1e-6);
}

TEST_CASE("logistic objective is convex: restarts agree") {
  Rng rng(9);
  Matrix x(50, 3);
  std::vector<int> y(50);
  for (int i = 0; i < 50; ++i) {
    y[i] = rng.bernoulli(0.5) ? 1 : 0;
    for (int c = 0; c < 3; ++c) x(i, c) = rng.normal(y[i] ? 0.5 : -0.5);
  }
  y[0] = 1;
  y[1] = 0;
  LogisticConfig cfg;
  cfg.max_iters = 5000;
  const LogisticModel from_zero = logistic_fit(x, y, cfg);
  const std::vector<double> other_start = {0.9, -0.4, 0.2};
  const LogisticModel from_other = logistic_fit(x, y, cfg, &other_start, -0.3);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(from_zero.weights[j] - from_other.weights[j]) < 1e-5);
  CHECK(std::abs(from_zero.bias - from_other.bias) < 1e-5);
}

TEST_CASE("logistic prediction invariances") {
  Rng rng(12);
  Matrix x(30, 2);
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) {
    y[i] = i % 2;
    x(i, 0) = rng.normal(y[i] ? 1.0 : -1.0);
    x(i, 1) = rng.normal();
  }
  const LogisticModel model = logistic_fit(x, y);

  // duplicate rows score identically
  Matrix dup(2, 2);
  dup(0, 0) = dup(1, 0) = 0.37;
  dup(0, 1) = dup(1, 1) = -0.81;
  const auto dp = logistic_predict(model, dup);
  CHECK(dp[0] == dp[1]);

  // scaling a feature while inversely scaling its weight keeps scores
  LogisticModel rescaled = model;
  rescaled.weights[0] /= 4.0;
  Matrix x4 = x;
  for (std::size_t r = 0; r < x4.rows(); ++r) x4(r, 0) *= 4.0;
  const auto base = logistic_predict(model, x);
  const auto scaled = logistic_predict(rescaled, x4);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled[i] == doctest::Approx(base[i]).epsilon(1e-12));

  CHECK_THROWS_AS(logistic_fit(x, std::vector<int>(30, 1)), ValidationError);
}

TEST_CASE("knn_predict worked examples") {
  Matrix train(4, 1);
  train(0, 0) = 0.0;
  train(1, 0) = 1.0;
  train(2, 0) = 2.0;
  train(3, 0) = 3.0;
  const std::vector<int> labels = {1, 1, 0, 0};

  // k=1 on an exact training row returns that row's label
  const KnnModel one = knn_fit(train, labels, 1);
  Matrix q(1, 1);
  q(0, 0) = 1.0;
  CHECK(knn_predict(one, q)[0] == 1.0);
  q(0, 0) = 3.0;
  CHECK(knn_predict(one, q)[0] == 0.0);

  // k = n returns the global positive rate everywhere
  const KnnModel all = knn_fit(train, labels, 4);
  q(0, 0) = -100.0;
  CHECK(knn_predict(all, q)[0] == 0.5);

  // three nearest labels {1,1,0} -> 2/3
  const KnnModel three = knn_fit(train, labels, 3);
  q(0, 0) = 0.5;
  CHECK(knn_predict(three, q)[0] == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(knn_fit(train, labels, 5), ValidationError);
}

TEST_CASE("knn_predict equals a brute-force oracle with index tie-breaks") {
  Rng rng(21);
  const std::size_t n_train = 400, n_query = 60;
  Matrix train(n_train, 2);
  std::vector<int> labels(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    labels[i] = rng.bernoulli(0.35) ? 1 : 0;
    // lattice coordinates force plenty of exact distance ties
    train(i, 0) = std::floor(rng.uniform01() * 10.0);
    train(i, 1) = std::floor(rng.uniform01() * 10.0);
  }
  Matrix queries(n_query, 2);
  for (std::size_t i = 0; i < n_query; ++i) {
    queries(i, 0) = std::floor(rng.uniform01() * 10.0);
    queries(i, 1) = std::floor(rng.uniform01() * 10.0);
  }
  const int k = 7;
  const KnnModel model = knn_fit(train, labels, k);
  const auto got = knn_predict(model, queries);

  for (std::size_t qi = 0; qi < n_query; ++qi) {
    std::vector<std::pair<double, int>> dist;
    for (std::size_t t = 0; t < n_train; ++t) {
      double s = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double d = queries(qi, c) - train(t, c);
        s += d * d;
      }
      dist.push_back({s, static_cast<int>(t)});
    }
    std::sort(dist.begin(), dist.end());
    double pos = 0.0;
    for (int t = 0; t < k; ++t) pos += labels[dist[t].second];
    CHECK(got[qi] == pos / k);
  }
}
