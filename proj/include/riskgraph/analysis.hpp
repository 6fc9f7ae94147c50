#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riskgraph/cohort.hpp"
#include "riskgraph/simgraph.hpp"

namespace riskgraph {

// Per-node local clustering coefficient of the graph binarized at
// weight > weight_floor; directed graphs are symmetrized by union first.
// Nodes of degree < 2 get 0.
std::vector<double> lcc(const WeightedGraph& graph, double weight_floor);
std::vector<double> lcc(const DiffusionGraph& graph, double weight_floor);

struct LccClusters {
  std::vector<int> high_risk;  // node indices with LCC >= cutoff
  std::vector<int> other;
  double high_risk_mean_lcc = 0.0;
};

LccClusters lcc_cluster(const std::vector<double>& lcc_values, double cutoff);

struct RankSumResult {
  double u;  // Mann-Whitney U of the first sample
  double p;  // two-sided
  bool exact;
};

// Exact two-sided p from the tie-free U distribution when there are no ties
// and n_a * n_b <= 400; otherwise a normal approximation with continuity and
// tie corrections.
RankSumResult rank_sum(const std::vector<double>& a, const std::vector<double>& b);

struct SurvivalCurve {
  std::vector<double> times;     // distinct event times, ascending
  std::vector<double> survival;  // S after each event time
  std::vector<int> at_risk;
  std::vector<int> events;
};

// Product-limit estimator; event_flag 1 = event (transfer), 0 = censored.
SurvivalCurve kaplan_meier(const std::vector<double>& time_to_event,
                           const std::vector<int>& event_flag);

// step-function evaluation, S(0) = 1
double survival_at(const SurvivalCurve& curve, double t);

void write_km_csv(const std::string& path, const SurvivalCurve& curve,
                  const std::string& config_hash);

struct SummaryRow {
  std::string variable;
  int n_high = 0;
  double mean_high = 0.0;
  std::optional<double> sd_high;
  int n_other = 0;
  double mean_other = 0.0;
  std::optional<double> sd_other;
  std::optional<double> p_value;  // rank-sum, absent when a side is empty
};

struct ClusterReport {
  std::vector<std::string> graph_node_ids;
  std::vector<double> lcc_values;      // aligned with graph_node_ids
  double cutoff = 0.0;
  std::vector<std::string> high_risk_ids;
  std::vector<SummaryRow> rows;
  SurvivalCurve km_high_risk;
  SurvivalCurve km_other;
  bool high_risk_empty = false;
};

// mean of one vital's observed values over the patient's first three days;
// absent when nothing was observed
std::optional<double> first_three_day_mean(const PatientRecord& rec, std::size_t vital);

// membership: cohort patient index -> true when in the high-risk cluster.
// Continuous variables are summarized per cluster with rank-sum p-values;
// vitals are averaged over each patient's observed first three days.
ClusterReport cluster_summary(const Cohort& cohort, const std::vector<bool>& membership,
                              const std::vector<std::string>& graph_node_ids,
                              const std::vector<double>& lcc_values, double cutoff);

std::string cluster_report_text(const ClusterReport& report);

}  // namespace riskgraph
