#include "riskgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "riskgraph/error.hpp"
#include "riskgraph/kernels.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

namespace {

std::vector<double> lcc_from_adjacency(std::vector<std::vector<int>> adj) {
  for (auto& lst : adj) {
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }
  const auto tri = kernels::triangle_counts(adj);
  std::vector<double> out(adj.size(), 0.0);
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const double deg = static_cast<double>(adj[v].size());
    if (deg >= 2.0) out[v] = 2.0 * static_cast<double>(tri[v]) / (deg * (deg - 1.0));
  }
  return out;
}

}  // namespace

std::vector<double> lcc(const WeightedGraph& graph, double weight_floor) {
  if (weight_floor < 0.0) throw ValidationError("analysis: weight_floor must be >= 0");
  std::vector<std::vector<int>> adj(graph.size());
  for (int i = 0; i < static_cast<int>(graph.size()); ++i)
    for (const auto& [j, w] : graph.neighbors(i))
      if (w > weight_floor) adj[i].push_back(j);
  return lcc_from_adjacency(std::move(adj));
}

std::vector<double> lcc(const DiffusionGraph& graph, double weight_floor) {
  if (weight_floor < 0.0) throw ValidationError("analysis: weight_floor must be >= 0");
  const std::size_t n = graph.node_ids.size();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // union symmetrization of the directed walk graph
      if (graph.adjacency(i, j) > weight_floor || graph.adjacency(j, i) > weight_floor) {
        adj[i].push_back(static_cast<int>(j));
      }
    }
  return lcc_from_adjacency(std::move(adj));
}

LccClusters lcc_cluster(const std::vector<double>& lcc_values, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0))
    throw ValidationError("analysis: cutoff must lie in [0, 1]");
  LccClusters c;
  double sum = 0.0;
  for (std::size_t v = 0; v < lcc_values.size(); ++v) {
    if (lcc_values[v] >= cutoff) {
      c.high_risk.push_back(static_cast<int>(v));
      sum += lcc_values[v];
    } else {
      c.other.push_back(static_cast<int>(v));
    }
  }
  if (!c.high_risk.empty()) c.high_risk_mean_lcc = sum / static_cast<double>(c.high_risk.size());
  return c;
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// P(U <= u) of the tie-free Mann-Whitney U distribution via the count
// recurrence C(m, n, u) = C(m, n-1, u) + C(m-1, n, u-n).
double exact_cdf(int m, int n, double u_value) {
  const int umax = m * n;
  const int u = static_cast<int>(std::floor(u_value + 1e-9));
  if (u < 0) return 0.0;
  if (u >= umax) return 1.0;
  // counts[j][t] = number of arrangements with U = t for sample sizes (j, n)
  std::vector<std::vector<double>> counts(m + 1, std::vector<double>(umax + 1, 0.0));
  for (int j = 0; j <= m; ++j) counts[j][0] = 1.0;  // n = 0 base handled in sweep start
  for (int nn = 1; nn <= n; ++nn) {
    std::vector<std::vector<double>> next(m + 1, std::vector<double>(umax + 1, 0.0));
    next[0][0] = 1.0;
    for (int j = 1; j <= m; ++j)
      for (int t = 0; t <= j * nn; ++t) {
        double c = counts[j][t];  // C(j, nn-1, t)
        if (t >= nn) c += next[j - 1][t - nn];
        next[j][t] = c;
      }
    counts = std::move(next);
  }
  double total = 0.0, below = 0.0;
  for (int t = 0; t <= umax; ++t) {
    total += counts[m][t];
    if (t <= u) below += counts[m][t];
  }
  return below / total;
}

}  // namespace

RankSumResult rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ValidationError("analysis: rank_sum needs non-empty samples");
  const std::size_t m = a.size(), n = b.size();

  // U with half credit for ties, via midranks over the pooled sample
  std::vector<std::pair<double, int>> pooled;  // (value, 0 = a, 1 = b)
  pooled.reserve(m + n);
  for (double x : a) pooled.push_back({x, 0});
  for (double x : b) pooled.push_back({x, 1});
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  bool has_ties = false;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    if (t > 1.0) {
      has_ties = true;
      tie_term += t * t * t - t;
    }
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) rank_sum_a += mid;
    i = j;
  }
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  const double u = rank_sum_a - static_cast<double>(m) * (static_cast<double>(m) + 1.0) / 2.0;

  RankSumResult result{u, 1.0, false};

  if (!has_ties && mn <= 400.0) {
    result.exact = true;
    const double cdf = exact_cdf(static_cast<int>(m), static_cast<int>(n), u);
    // survival including the observed value, by symmetry of the null
    const double sf = exact_cdf(static_cast<int>(m), static_cast<int>(n), mn - u);
    result.p = std::min(1.0, 2.0 * std::min(cdf, sf));
    return result;
  }

  const double big_n = static_cast<double>(m + n);
  const double var =
      mn / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  if (var <= 0.0) {
    result.p = 1.0;  // all pooled values identical
    return result;
  }
  const double z = (std::abs(u - mn / 2.0) - 0.5) / std::sqrt(var);
  result.p = std::min(1.0, 2.0 * normal_sf(std::max(0.0, z)));
  return result;
}

SurvivalCurve kaplan_meier(const std::vector<double>& time_to_event,
                           const std::vector<int>& event_flag) {
  if (time_to_event.empty()) throw ValidationError("analysis: kaplan_meier needs observations");
  if (time_to_event.size() != event_flag.size())
    throw ValidationError("analysis: kaplan_meier time/flag size mismatch");
  for (double t : time_to_event)
    if (!(t > 0.0)) throw ValidationError("analysis: event times must be > 0");

  // distinct times in order; count events and censorings at each
  std::map<double, std::pair<int, int>> at_time;  // time -> (events, censored)
  for (std::size_t i = 0; i < time_to_event.size(); ++i) {
    auto& slot = at_time[time_to_event[i]];
    (event_flag[i] != 0 ? slot.first : slot.second) += 1;
  }

  SurvivalCurve curve;
  int at_risk = static_cast<int>(time_to_event.size());
  double survival = 1.0;
  for (const auto& [time, counts] : at_time) {
    const auto [d, c] = counts;
    if (d > 0) {
      survival *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.times.push_back(time);
      curve.survival.push_back(survival);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(d);
    }
    at_risk -= d + c;
  }
  return curve;
}

double survival_at(const SurvivalCurve& curve, double t) {
  double s = 1.0;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] <= t)
      s = curve.survival[i];
    else
      break;
  }
  return s;
}

void write_km_csv(const std::string& path, const SurvivalCurve& curve,
                  const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw PipelineError("analysis: cannot write " + path);
  out << "# config_hash=" << config_hash << "\n";
  out << "time,survival,at_risk,events\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i)
    out << fmt_g(curve.times[i]) << ',' << fmt_g(curve.survival[i]) << ',' << curve.at_risk[i]
        << ',' << curve.events[i] << '\n';
}

namespace {

struct GroupStats {
  int n = 0;
  double mean = 0.0;
  std::optional<double> sd;
};

GroupStats stats_of(const std::vector<double>& xs) {
  GroupStats g;
  g.n = static_cast<int>(xs.size());
  if (xs.empty()) return g;
  g.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() >= 2) {
    double sq = 0.0;
    for (double x : xs) sq += (x - g.mean) * (x - g.mean);
    g.sd = std::sqrt(sq / (xs.size() - 1.0));
  }
  return g;
}

SummaryRow make_row(const std::string& variable, const std::vector<double>& high,
                    const std::vector<double>& other) {
  SummaryRow row;
  row.variable = variable;
  const GroupStats h = stats_of(high), o = stats_of(other);
  row.n_high = h.n;
  row.mean_high = h.mean;
  row.sd_high = h.sd;
  row.n_other = o.n;
  row.mean_other = o.mean;
  row.sd_other = o.sd;
  if (!high.empty() && !other.empty()) row.p_value = rank_sum(high, other).p;
  return row;
}

}  // namespace

std::optional<double> first_three_day_mean(const PatientRecord& rec, std::size_t vital) {
  double sum = 0.0;
  int count = 0;
  const int upto = std::min(rec.last_day(), 3);
  for (int day = 1; day <= upto; ++day) {
    const auto& v = rec.vitals[day - 1].values[vital];
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

ClusterReport cluster_summary(const Cohort& cohort, const std::vector<bool>& membership,
                              const std::vector<std::string>& graph_node_ids,
                              const std::vector<double>& lcc_values, double cutoff) {
  if (membership.size() != cohort.patients.size())
    throw ValidationError("analysis: membership must cover all cohort ids");
  if (graph_node_ids.size() != lcc_values.size())
    throw ValidationError("analysis: graph ids/lcc size mismatch");

  ClusterReport report;
  report.graph_node_ids = graph_node_ids;
  report.lcc_values = lcc_values;
  report.cutoff = cutoff;

  for (std::size_t i = 0; i < cohort.patients.size(); ++i)
    if (membership[i]) report.high_risk_ids.push_back(cohort.patients[i].id);
  report.high_risk_empty = report.high_risk_ids.empty();

  auto split_values = [&](auto&& value_of) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
      const std::optional<double> v = value_of(cohort.patients[i]);
      if (!v) continue;
      (membership[i] ? out.first : out.second).push_back(*v);
    }
    return out;
  };

  {
    auto [h, o] = split_values(
        [](const PatientRecord& r) { return std::optional<double>(static_cast<double>(r.age)); });
    report.rows.push_back(make_row("age", h, o));
  }
  for (std::size_t v = 0; v < kNumVitals; ++v) {
    auto [h, o] =
        split_values([v](const PatientRecord& r) { return first_three_day_mean(r, v); });
    report.rows.push_back(make_row(kVitalNames[v], h, o));
  }
  {
    // LCC is only defined for graph members
    std::vector<double> h, o;
    for (std::size_t g = 0; g < graph_node_ids.size(); ++g) {
      const int idx = cohort.index_of(graph_node_ids[g]);
      if (idx < 0) continue;
      (membership[idx] ? h : o).push_back(lcc_values[g]);
    }
    report.rows.push_back(make_row("lcc", h, o));
  }
  {
    auto [h, o] = split_values([](const PatientRecord& r) {
      return std::optional<double>(static_cast<double>(r.exit_day()));
    });
    report.rows.push_back(make_row("length_of_stay", h, o));
  }

  // time to transfer; discharge and still-present observations are censored
  std::vector<double> time_h, time_o;
  std::vector<int> flag_h, flag_o;
  for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
    const auto& rec = cohort.patients[i];
    const double t = static_cast<double>(rec.exit_day());
    const int ev = rec.outcome.kind == OutcomeKind::Transferred ? 1 : 0;
    if (membership[i]) {
      time_h.push_back(t);
      flag_h.push_back(ev);
    } else {
      time_o.push_back(t);
      flag_o.push_back(ev);
    }
  }
  if (!time_h.empty()) report.km_high_risk = kaplan_meier(time_h, flag_h);
  if (!time_o.empty()) report.km_other = kaplan_meier(time_o, flag_o);
  return report;
}

std::string cluster_report_text(const ClusterReport& report) {
  std::ostringstream out;
  out << "cutoff=" << fmt_g(report.cutoff) << "\n";
  out << "high_risk_n=" << report.high_risk_ids.size() << "\n";
  if (report.high_risk_empty) out << "warning=high-risk cluster is empty\n";
  out << "high_risk_ids=";
  for (std::size_t i = 0; i < report.high_risk_ids.size(); ++i) {
    if (i) out << ';';
    out << report.high_risk_ids[i];
  }
  out << "\n";
  out << "variable,n_high,mean_high,sd_high,n_other,mean_other,sd_other,p\n";
  for (const auto& row : report.rows) {
    out << row.variable << ',' << row.n_high << ',' << fmt_fixed(row.mean_high, 4) << ','
        << (row.sd_high ? fmt_fixed(*row.sd_high, 4) : std::string("-")) << ',' << row.n_other
        << ',' << fmt_fixed(row.mean_other, 4) << ','
        << (row.sd_other ? fmt_fixed(*row.sd_other, 4) : std::string("-")) << ','
        << (row.p_value ? fmt_g(*row.p_value) : std::string("-")) << "\n";
  }
  return out.str();
}

}  // namespace riskgraph
