#pragma once

#include <string>
#include <vector>

namespace riskgraph {

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;  // +inf for the (0,0) anchor
};

// Threshold sweep over the distinct score values, descending; a point per
// threshold plus the (0,0) and (1,1) anchors. Predicting positive means
// score >= threshold.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Mann-Whitney AUC: (concordant pairs + 0.5 * tied pairs) / (n_pos * n_neg).
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// trapezoidal area under an roc_curve result
double trapezoid_auc(const std::vector<RocPoint>& curve);

struct SenSpe {
  double sensitivity;
  double specificity;
};

SenSpe sen_spe(const std::vector<double>& scores, const std::vector<int>& labels,
               double threshold);

// threshold among the observed scores maximizing sensitivity + specificity - 1
double youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalReport {
  int day = 0;
  std::string model;
  double auc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double threshold = 0.0;
  std::vector<RocPoint> roc_points;
};

EvalReport evaluate(int day, const std::string& model, const std::vector<double>& scores,
                    const std::vector<int>& labels, double threshold);

// one structured line per report: key=value fields
std::string report_line(const EvalReport& report);

void write_roc_csv(const std::string& path, const EvalReport& report,
                   const std::string& config_hash);

}  // namespace riskgraph
