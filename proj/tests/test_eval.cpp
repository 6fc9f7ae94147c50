#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "riskgraph/error.hpp"
#include "riskgraph/eval.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;

namespace {

// brute-force pairwise oracle: (concordant + 0.5 * ties) / (n_pos * n_neg)
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  }
  return num / pairs;
}

}  // namespace

TEST_CASE("auc worked examples") {
  CHECK(auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
}

TEST_CASE("auc equals the brute-force pairwise oracle exactly") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(48);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // quantized scores force ties regularly
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::floor(rng.uniform01() * 8.0) / 8.0;
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(auc(scores, labels) == auc_oracle(scores, labels));
  }
}

TEST_CASE("auc properties: monotone transform, complement, trapezoid equality") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.below(40);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.normal();
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;

    const double base = auc(scores, labels);

    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(2.0 * scores[i]) + 3.0;
    CHECK(auc(transformed, labels) == base);

    // continuous scores: no ties, so auc(s) + auc(-s) = 1
    std::vector<double> negated(n);
    for (std::size_t i = 0; i < n; ++i) negated[i] = -scores[i];
    CHECK(auc(negated, labels) + base == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(std::abs(trapezoid_auc(roc_curve(scores, labels)) - base) < 1e-12);
  }
}

TEST_CASE("roc_curve worked examples") {
  // perfectly separated scores pass through (0, 1)
  auto curve = roc_curve({0.9, 0.8, 0.1}, {1, 1, 0});
  bool hits_corner = false;
  for (const auto& p : curve) hits_corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  CHECK(hits_corner);

  // all scores equal: single threshold, diagonal
  auto flat = roc_curve({0.3, 0.3, 0.3}, {1, 0, 1});
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].fpr == 0.0);
  CHECK(flat[0].tpr == 0.0);
  CHECK(flat[1].fpr == 1.0);
  CHECK(flat[1].tpr == 1.0);

  // hand sweep: thresholds at distinct scores, descending
  auto swept = roc_curve({0.9, 0.8, 0.4, 0.3}, {1, 0, 1, 0});
  std::vector<std::pair<double, double>> expected = {
      {0.0, 0.0}, {0.0, 0.5}, {0.5, 0.5}, {0.5, 1.0}, {1.0, 1.0}};
  REQUIRE(swept.size() == expected.size());
  for (std::size_t i = 0; i < swept.size(); ++i) {
    CHECK(swept[i].fpr == expected[i].first);
    CHECK(swept[i].tpr == expected[i].second);
  }

  // monotone non-decreasing in both coordinates
  for (std::size_t i = 1; i < swept.size(); ++i) {
    CHECK(swept[i].fpr >= swept[i - 1].fpr);
    CHECK(swept[i].tpr >= swept[i - 1].tpr);
  }
}

TEST_CASE("sen_spe worked examples") {
  const std::vector<double> scores = {0.9, 0.2, 0.7, 0.1};
  const std::vector<int> labels = {1, 0, 1, 0};
  auto all_positive = sen_spe(scores, labels, 0.0);
  CHECK(all_positive.sensitivity == 1.0);
  auto none_positive = sen_spe(scores, labels, 1.5);
  CHECK(none_positive.sensitivity == 0.0);
  CHECK(none_positive.specificity == 1.0);
  auto mid = sen_spe(scores, labels, 0.5);
  CHECK(mid.sensitivity == 1.0);
  CHECK(mid.specificity == 1.0);
}

TEST_CASE("youden threshold separates a clean fixture") {
  const std::vector<double> scores = {0.9, 0.85, 0.6, 0.3, 0.2, 0.1};
  const std::vector<int> labels = {1, 1, 1, 0, 0, 0};
  const double t = youden_threshold(scores, labels);
  auto s = sen_spe(scores, labels, t);
  CHECK(s.sensitivity == 1.0);
  CHECK(s.specificity == 1.0);
}

TEST_CASE("eval rejects single-class inputs") {
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {0, 0}), ValidationError);
}

TEST_CASE("roc curves are monotone staircases ending at (1,1)") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::floor(rng.uniform01() * 6.0) / 6.0;  // heavy ties
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const auto curve = roc_curve(scores, labels);
    CHECK(curve.front().fpr == 0.0);
    CHECK(curve.front().tpr == 0.0);
    CHECK(curve.back().fpr == 1.0);
    CHECK(curve.back().tpr == 1.0);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve[i].fpr >= curve[i - 1].fpr);
      CHECK(curve[i].tpr >= curve[i - 1].tpr);
      CHECK(curve[i].threshold < curve[i - 1].threshold);
    }
  }
}
