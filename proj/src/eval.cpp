#include "riskgraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "riskgraph/error.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

namespace {

void check_two_classes(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("eval: scores/labels size mismatch");
  if (scores.empty()) throw ValidationError("eval: empty inputs");
  bool pos = false, neg = false;
  for (int y : labels) (y != 0 ? pos : neg) = true;
  if (!pos || !neg) throw ValidationError("eval: both classes must be present");
}

}  // namespace

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  check_two_classes(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double n_pos = 0, n_neg = 0;
  for (int y : labels) (y != 0 ? n_pos : n_neg) += 1;

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double threshold = scores[order[i]];
    // absorb every sample tied at this score; they flip together
    while (i < n && scores[order[i]] == threshold) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({fp / n_neg, tp / n_pos, threshold});
  }
  return curve;  // the final point is (1, 1) by construction
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_two_classes(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // midranks; tie groups share the average rank, so the rank-sum formula
  // awards exactly half credit per tied pair
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = mid;
    i = j;
  }
  double n_pos = 0, n_neg = 0, rank_sum_pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (labels[t] != 0) {
      n_pos += 1;
      rank_sum_pos += rank[t];
    } else {
      n_neg += 1;
    }
  }
  const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

double trapezoid_auc(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 * (curve[i].tpr + curve[i - 1].tpr);
  return area;
}

SenSpe sen_spe(const std::vector<double>& scores, const std::vector<int>& labels,
               double threshold) {
  check_two_classes(scores, labels);
  double tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_positive = scores[i] >= threshold;
    if (labels[i] != 0)
      (predicted_positive ? tp : fn) += 1;
    else
      (predicted_positive ? fp : tn) += 1;
  }
  return {tp / (tp + fn), tn / (tn + fp)};
}

double youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_two_classes(scores, labels);
  std::vector<double> candidates = scores;
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best_threshold = candidates.front();
  double best_j = -2.0;
  for (double t : candidates) {
    const SenSpe s = sen_spe(scores, labels, t);
    const double j = s.sensitivity + s.specificity - 1.0;
    if (j > best_j) {
      best_j = j;
      best_threshold = t;
    }
  }
  return best_threshold;
}

EvalReport evaluate(int day, const std::string& model, const std::vector<double>& scores,
                    const std::vector<int>& labels, double threshold) {
  EvalReport r;
  r.day = day;
  r.model = model;
  r.auc = auc(scores, labels);
  const SenSpe s = sen_spe(scores, labels, threshold);
  r.sensitivity = s.sensitivity;
  r.specificity = s.specificity;
  r.threshold = threshold;
  r.roc_points = roc_curve(scores, labels);
  // the rank-based statistic and the curve integral are two routes to the
  // same number; a gap means one of them broke
  if (std::abs(trapezoid_auc(r.roc_points) - r.auc) > 1e-12)
    throw PipelineError("eval: AUC routes disagree for model " + model);
  return r;
}

std::string report_line(const EvalReport& r) {
  return "day=" + std::to_string(r.day) + " model=" + r.model + " auc=" + fmt_fixed(r.auc, 6) +
         " sensitivity=" + fmt_fixed(r.sensitivity, 6) +
         " specificity=" + fmt_fixed(r.specificity, 6) + " threshold=" + fmt_g(r.threshold);
}

void write_roc_csv(const std::string& path, const EvalReport& report,
                   const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw PipelineError("eval: cannot write " + path);
  out << "# config_hash=" << config_hash << "\n";
  out << "day,model,fpr,tpr,threshold\n";
  for (const auto& p : report.roc_points)
    out << report.day << ',' << report.model << ',' << fmt_g(p.fpr) << ',' << fmt_g(p.tpr) << ','
        << fmt_g(p.threshold) << '\n';
}

}  // namespace riskgraph
