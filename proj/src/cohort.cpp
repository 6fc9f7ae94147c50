#include "riskgraph/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "riskgraph/error.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/textio.hpp"

namespace riskgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int parse_int(const std::string& s, const std::string& what, int line) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cohort: bad " + what + " '" + s + "' at line " + std::to_string(line));
  }
}

double parse_double(const std::string& s, const std::string& what, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cohort: bad " + what + " '" + s + "' at line " + std::to_string(line));
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cohort: cannot open file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

int Cohort::max_day() const {
  int m = 0;
  for (const auto& p : patients) m = std::max(m, p.last_day());
  return m;
}

int Cohort::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < patients.size(); ++i)
    if (patients[i].id == id) return static_cast<int>(i);
  return -1;
}

Cohort load_cohort(const std::string& vitals_csv_path, const std::string& patients_csv_path) {
  const std::string patients_header =
      "id,age,gender,diabetes,cardiovascular,obesity,copd,outcome,outcome_day";
  const std::string vitals_header = "id,day,bt,pr,spo2,sbp,dbp";

  Cohort cohort;
  std::map<std::string, int> index;

  auto plines = read_lines(patients_csv_path);
  if (plines.empty() || trim(plines[0]) != patients_header)
    throw ValidationError("cohort: " + patients_csv_path + " must start with header '" +
                          patients_header + "'");
  for (std::size_t li = 1; li < plines.size(); ++li) {
    const int line = static_cast<int>(li) + 1;
    if (trim(plines[li]).empty()) continue;
    auto f = split_csv_line(plines[li]);
    if (f.size() != 9)
      throw ValidationError("cohort: expected 9 fields at line " + std::to_string(line) + " of " +
                            patients_csv_path);
    PatientRecord rec;
    rec.id = trim(f[0]);
    if (rec.id.empty())
      throw ValidationError("cohort: empty patient id at line " + std::to_string(line));
    if (index.count(rec.id))
      throw ValidationError("cohort: duplicate patient id " + rec.id + " at line " +
                            std::to_string(line));
    rec.age = parse_int(trim(f[1]), "age", line);
    if (rec.age < 0)
      throw ValidationError("cohort: negative age for id " + rec.id + " at line " +
                            std::to_string(line));
    const std::string g = trim(f[2]);
    if (g == "F")
      rec.gender = Gender::Female;
    else if (g == "M")
      rec.gender = Gender::Male;
    else
      throw ValidationError("cohort: gender must be F or M at line " + std::to_string(line));
    for (std::size_t c = 0; c < kNumComorbidities; ++c) {
      const std::string v = trim(f[3 + c]);
      if (v != "0" && v != "1")
        throw ValidationError(std::string("cohort: ") + kComorbidityNames[c] +
                              " must be 0 or 1 at line " + std::to_string(line));
      rec.comorbidities[c] = (v == "1");
    }
    const std::string oc = trim(f[7]);
    const std::string od = trim(f[8]);
    if (oc == "transferred")
      rec.outcome.kind = OutcomeKind::Transferred;
    else if (oc == "discharged")
      rec.outcome.kind = OutcomeKind::Discharged;
    else if (oc == "present")
      rec.outcome.kind = OutcomeKind::Present;
    else
      throw ValidationError("cohort: unknown outcome '" + oc + "' at line " +
                            std::to_string(line));
    if (rec.outcome.kind == OutcomeKind::Present) {
      rec.outcome.day = 0;
    } else {
      rec.outcome.day = parse_int(od, "outcome_day", line);
      if (rec.outcome.day < 1)
        throw ValidationError("cohort: outcome_day must be >= 1 at line " + std::to_string(line));
    }
    index[rec.id] = static_cast<int>(cohort.patients.size());
    cohort.patients.push_back(std::move(rec));
  }
  if (cohort.patients.empty())
    throw ValidationError("cohort: no patients in " + patients_csv_path);

  // (id, day) -> sample, tracked to detect duplicates and day gaps
  std::map<std::string, std::map<int, VitalsSample>> samples;
  auto vlines = read_lines(vitals_csv_path);
  if (vlines.empty() || trim(vlines[0]) != vitals_header)
    throw ValidationError("cohort: " + vitals_csv_path + " must start with header '" +
                          vitals_header + "'");
  for (std::size_t li = 1; li < vlines.size(); ++li) {
    const int line = static_cast<int>(li) + 1;
    if (trim(vlines[li]).empty()) continue;
    auto f = split_csv_line(vlines[li]);
    if (f.size() != 7)
      throw ValidationError("cohort: expected 7 fields at line " + std::to_string(line) + " of " +
                            vitals_csv_path);
    const std::string id = trim(f[0]);
    if (!index.count(id))
      throw ValidationError("cohort: vitals for unknown id " + id + " at line " +
                            std::to_string(line));
    const int day = parse_int(trim(f[1]), "day", line);
    if (day < 1)
      throw ValidationError("cohort: day must be >= 1 at line " + std::to_string(line));
    if (samples[id].count(day))
      throw ValidationError("cohort: duplicate vitals row for id " + id + ", day " +
                            std::to_string(day) + " at line " + std::to_string(line));
    VitalsSample s;
    for (std::size_t v = 0; v < kNumVitals; ++v) {
      const std::string cell = trim(f[2 + v]);
      if (cell.empty()) continue;
      const double x = parse_double(cell, kVitalNames[v], line);
      if (x < kVitalBounds[v].lo || x > kVitalBounds[v].hi)
        throw ValidationError(std::string("cohort: ") + kVitalNames[v] + "=" + cell +
                              " outside physiologic bounds at line " + std::to_string(line));
      s.values[v] = x;
    }
    samples[id][day] = s;
  }

  for (auto& rec : cohort.patients) {
    auto it = samples.find(rec.id);
    if (it == samples.end())
      throw ValidationError("cohort: no vitals rows for id " + rec.id);
    const auto& by_day = it->second;
    int expected = 1;
    for (const auto& [day, sample] : by_day) {
      if (day != expected)
        throw ValidationError("cohort: non-contiguous vitals days for id " + rec.id +
                              " (expected day " + std::to_string(expected) + ", found " +
                              std::to_string(day) + ")");
      rec.vitals.push_back(sample);
      ++expected;
    }
    if (rec.outcome.kind != OutcomeKind::Present && rec.last_day() != rec.outcome.day)
      throw ValidationError("cohort: id " + rec.id + " has vitals for days 1.." +
                            std::to_string(rec.last_day()) + " but outcome day " +
                            std::to_string(rec.outcome.day));
  }
  return cohort;
}

void write_cohort_csv(const Cohort& cohort, const std::string& patients_csv_path,
                      const std::string& vitals_csv_path) {
  std::ofstream p(patients_csv_path);
  if (!p) throw PipelineError("cohort: cannot write " + patients_csv_path);
  p << "id,age,gender,diabetes,cardiovascular,obesity,copd,outcome,outcome_day\n";
  for (const auto& rec : cohort.patients) {
    p << rec.id << ',' << rec.age << ',' << (rec.gender == Gender::Female ? 'F' : 'M');
    for (bool c : rec.comorbidities) p << ',' << (c ? 1 : 0);
    switch (rec.outcome.kind) {
      case OutcomeKind::Transferred:
        p << ",transferred," << rec.outcome.day;
        break;
      case OutcomeKind::Discharged:
        p << ",discharged," << rec.outcome.day;
        break;
      case OutcomeKind::Present:
        p << ",present,";
        break;
    }
    p << '\n';
  }

  std::ofstream v(vitals_csv_path);
  if (!v) throw PipelineError("cohort: cannot write " + vitals_csv_path);
  v << "id,day,bt,pr,spo2,sbp,dbp\n";
  for (const auto& rec : cohort.patients) {
    for (int day = 1; day <= rec.last_day(); ++day) {
      v << rec.id << ',' << day;
      for (const auto& field : rec.vitals[day - 1].values) {
        v << ',';
        if (field) v << fmt_g(*field);
      }
      v << '\n';
    }
  }
}

std::vector<DayPanel> raw_day_panels(const Cohort& cohort) {
  std::vector<DayPanel> panels;
  const int max_day = cohort.max_day();
  for (int day = 1; day <= max_day; ++day) {
    DayPanel panel;
    panel.day = day;
    for (std::size_t i = 0; i < cohort.patients.size(); ++i)
      if (cohort.patients[i].exit_day() >= day) panel.patient_rows.push_back(static_cast<int>(i));
    panel.values = Matrix(panel.patient_rows.size(), kNumVitals, kNaN);
    for (std::size_t r = 0; r < panel.patient_rows.size(); ++r) {
      const auto& sample = cohort.patients[panel.patient_rows[r]].vitals[day - 1];
      for (std::size_t v = 0; v < kNumVitals; ++v)
        if (sample.values[v]) panel.values(r, v) = *sample.values[v];
    }
    panels.push_back(std::move(panel));
  }
  return panels;
}

RiskSet risk_set(const Cohort& cohort, int day, const std::vector<DayPanel>& imputed_panels) {
  if (day < 1) throw ValidationError("cohort: risk-set day must be >= 1");
  if (day > cohort.max_day())
    throw ValidationError("cohort: day " + std::to_string(day) +
                          " exceeds maximum observed day " + std::to_string(cohort.max_day()));
  if (static_cast<int>(imputed_panels.size()) < day)
    throw ValidationError("cohort: imputed panels must cover days 1.." + std::to_string(day));
  for (int t = 1; t <= day; ++t) {
    if (imputed_panels[t - 1].day != t)
      throw ValidationError("cohort: imputed panel order mismatch at day " + std::to_string(t));
    if (imputed_panels[t - 1].values.missing_count() > 0)
      throw ValidationError("cohort: imputed panel for day " + std::to_string(t) +
                            " still has missing entries");
  }

  RiskSet rs;
  rs.day = day;
  for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
    const auto& rec = cohort.patients[i];
    if (rec.exit_day() < day) continue;
    rs.patient_rows.push_back(static_cast<int>(i));
    rs.ids.push_back(rec.id);
    rs.labels.push_back(rec.outcome.kind == OutcomeKind::Transferred && rec.outcome.day == day
                            ? 1
                            : 0);
  }

  rs.features = Matrix(rs.ids.size(), kNumVitals * day, 0.0);
  for (int t = 1; t <= day; ++t) {
    const DayPanel& panel = imputed_panels[t - 1];
    // map cohort row -> panel row
    std::map<int, int> panel_row;
    for (std::size_t r = 0; r < panel.patient_rows.size(); ++r)
      panel_row[panel.patient_rows[r]] = static_cast<int>(r);
    for (std::size_t r = 0; r < rs.patient_rows.size(); ++r) {
      auto it = panel_row.find(rs.patient_rows[r]);
      if (it == panel_row.end())
        throw ValidationError("cohort: day " + std::to_string(t) + " panel is missing patient " +
                              rs.ids[r]);
      for (std::size_t v = 0; v < kNumVitals; ++v)
        rs.features(r, (t - 1) * kNumVitals + v) = panel.values(it->second, v);
    }
  }
  return rs;
}

Cohort generate_synthetic_cohort(const GenConfig& cfg) {
  if (cfg.n_patients < 2) throw ValidationError("generator: n_patients must be >= 2");
  if (!(cfg.severe_fraction > 0.0 && cfg.severe_fraction < 1.0))
    throw ValidationError("generator: severe_fraction must lie in (0, 1)");
  if (cfg.severe_fraction * cfg.n_patients < 1.0)
    throw ValidationError("generator: infeasible config, severe_fraction * n_patients < 1");
  for (const auto& f : cfg.vitals) {
    if (f.nonsevere_sd <= 0.0 || f.severe_sd <= 0.0)
      throw ValidationError("generator: feature sds must be > 0");
    if (f.missing_rate < 0.0 || f.missing_rate >= 1.0)
      throw ValidationError("generator: missing rates must lie in [0, 1)");
  }
  if (cfg.max_stay_days < 1) throw ValidationError("generator: max_stay_days must be >= 1");
  if (cfg.transfer_day_probs.empty())
    throw ValidationError("generator: transfer_day_probs must be non-empty");
  if (!(cfg.ar1_phi >= 0.0 && cfg.ar1_phi < 1.0))
    throw ValidationError("generator: ar1_phi must lie in [0, 1)");

  const int n = cfg.n_patients;
  const int n_severe = static_cast<int>(std::floor(cfg.severe_fraction * n + 0.5));

  Rng rng(cfg.seed);

  // severity assignment decoupled from id order
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  {
    Rng shuffle_rng = rng.fork(0x5e7e);
    shuffle_rng.shuffle(order);
  }
  std::vector<bool> severe(n, false);
  for (int i = 0; i < n_severe; ++i) severe[order[i]] = true;

  double transfer_prob_total = 0.0;
  for (double p : cfg.transfer_day_probs) {
    if (p < 0.0) throw ValidationError("generator: transfer_day_probs must be >= 0");
    transfer_prob_total += p;
  }
  if (transfer_prob_total <= 0.0)
    throw ValidationError("generator: transfer_day_probs must sum to > 0");

  const int id_width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));

  // Severity trajectory: a patient transferred on day D ramps linearly from
  // onset(D) to 1 of the group shift; the later the transfer, the closer to
  // normal the arrival-day state. The shift is then rescaled, and the severe
  // noise sd deflated, so the *observed* severe sample mean and sd match the
  // configured severe-group statistics (Table-style numbers are measured
  // averages over the stay, not transfer-day endpoints).
  const auto onset_of = [&](int stay) {
    if (stay <= 1) return 1.0;
    return std::max(0.4, 1.0 - (1.0 - cfg.severe_onset_fraction) * (stay - 1));
  };
  const auto frac_of = [&](int day, int stay) {
    if (stay <= 1) return 1.0;
    const double onset = onset_of(stay);
    return onset + (1.0 - onset) * (day - 1) / (stay - 1);
  };
  double severity_scale = 1.0;
  double scaled_frac_var = 0.0;  // day-weighted variance of the scaled ramp
  {
    double expected_days = 0.0, frac_m1 = 0.0, frac_m2 = 0.0;
    for (std::size_t d = 0; d < cfg.transfer_day_probs.size(); ++d) {
      const int stay = std::min(static_cast<int>(d) + 1, cfg.max_stay_days);
      const double p = cfg.transfer_day_probs[d] / transfer_prob_total;
      expected_days += p * stay;
      for (int day = 1; day <= stay; ++day) {
        const double f = frac_of(day, stay);
        frac_m1 += p * f;
        frac_m2 += p * f * f;
      }
    }
    if (frac_m1 > 0.0 && expected_days > 0.0) {
      severity_scale = expected_days / frac_m1;
      const double m1 = frac_m1 / expected_days;
      const double m2 = frac_m2 / expected_days;
      scaled_frac_var = severity_scale * severity_scale * std::max(0.0, m2 - m1 * m1);
    }
  }
  std::array<double, kNumVitals> severe_noise_sd{};
  for (std::size_t v = 0; v < kNumVitals; ++v) {
    const auto& fg = cfg.vitals[v];
    const double gap = fg.severe_mean - fg.nonsevere_mean;
    const double drift_var = scaled_frac_var * gap * gap;
    severe_noise_sd[v] = std::sqrt(
        std::max(fg.severe_sd * fg.severe_sd - drift_var, 0.09 * fg.severe_sd * fg.severe_sd));
  }

  Cohort cohort;
  cohort.patients.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng prng = rng.fork(0x1000 + static_cast<std::uint64_t>(i));
    PatientRecord rec;
    {
      std::string num = std::to_string(i + 1);
      rec.id = "p" + std::string(id_width - num.size(), '0') + num;
    }
    const bool is_severe = severe[i];
    const double age_mean = is_severe ? cfg.age.severe_mean : cfg.age.nonsevere_mean;
    const double age_sd = is_severe ? cfg.age.severe_sd : cfg.age.nonsevere_sd;
    rec.age = static_cast<int>(
        std::clamp(std::floor(prng.normal(age_mean, age_sd) + 0.5), 0.0, 110.0));
    rec.gender = prng.bernoulli(is_severe ? cfg.female_rate_severe : cfg.female_rate_nonsevere)
                     ? Gender::Female
                     : Gender::Male;
    for (std::size_t c = 0; c < kNumComorbidities; ++c)
      rec.comorbidities[c] = prng.bernoulli(is_severe ? cfg.comorbidity_rate_severe[c]
                                                      : cfg.comorbidity_rate_nonsevere[c]);

    int stay_days;
    if (is_severe) {
      double u = prng.uniform01() * transfer_prob_total;
      int day = 1;
      for (std::size_t d = 0; d < cfg.transfer_day_probs.size(); ++d) {
        u -= cfg.transfer_day_probs[d];
        if (u <= 0.0) {
          day = static_cast<int>(d) + 1;
          break;
        }
        day = static_cast<int>(cfg.transfer_day_probs.size());
      }
      stay_days = std::min(day, cfg.max_stay_days);
      rec.outcome = {OutcomeKind::Transferred, stay_days};
    } else {
      stay_days = static_cast<int>(std::clamp(
          std::floor(prng.normal(cfg.discharge_day_mean, cfg.discharge_day_sd) + 0.5), 1.0,
          static_cast<double>(cfg.max_stay_days)));
      rec.outcome = {OutcomeKind::Discharged, stay_days};
    }

    // AR(1) noise around the group mean plus the severity ramp
    std::array<double, kNumVitals> noise{};
    const double phi = cfg.ar1_phi;
    const double innovation_scale = std::sqrt(1.0 - phi * phi);
    rec.vitals.resize(stay_days);
    for (int day = 1; day <= stay_days; ++day) {
      const double frac = is_severe ? severity_scale * frac_of(day, stay_days) : 0.0;
      VitalsSample& s = rec.vitals[day - 1];
      std::array<bool, kNumVitals> missing{};
      bool all_missing = true;
      for (std::size_t v = 0; v < kNumVitals; ++v) {
        missing[v] = prng.bernoulli(cfg.vitals[v].missing_rate);
        all_missing = all_missing && missing[v];
      }
      if (all_missing) missing[prng.below(kNumVitals)] = false;
      for (std::size_t v = 0; v < kNumVitals; ++v) {
        const auto& fg = cfg.vitals[v];
        const double sd = is_severe ? severe_noise_sd[v] : fg.nonsevere_sd;
        if (day == 1)
          noise[v] = sd * prng.normal();
        else
          noise[v] = phi * noise[v] + sd * innovation_scale * prng.normal();
        double mean = fg.nonsevere_mean;
        if (is_severe) mean += frac * (fg.severe_mean - fg.nonsevere_mean);
        if (!missing[v])
          s.values[v] = std::clamp(mean + noise[v], kVitalBounds[v].lo, kVitalBounds[v].hi);
      }
    }
    cohort.patients.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace riskgraph
