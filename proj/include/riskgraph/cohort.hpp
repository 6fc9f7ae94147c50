#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskgraph/matrix.hpp"

namespace riskgraph {

inline constexpr std::size_t kNumVitals = 5;
inline constexpr std::array<const char*, kNumVitals> kVitalNames = {"bt", "pr", "spo2", "sbp",
                                                                    "dbp"};

struct VitalBound {
  double lo;
  double hi;
};
inline constexpr std::array<VitalBound, kNumVitals> kVitalBounds = {{
    {25.0, 45.0},   // bt
    {20.0, 250.0},  // pr
    {50.0, 100.0},  // spo2
    {30.0, 260.0},  // sbp
    {30.0, 260.0},  // dbp
}};

// One day of vital-sign measurements; absent fields were not recorded.
struct VitalsSample {
  std::array<std::optional<double>, kNumVitals> values;
};

enum class OutcomeKind { Transferred, Discharged, Present };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Present;
  int day = 0;  // 1-based; meaningful for Transferred and Discharged
};

enum class Gender { Female, Male };

inline constexpr std::size_t kNumComorbidities = 4;
inline constexpr std::array<const char*, kNumComorbidities> kComorbidityNames = {
    "diabetes", "cardiovascular", "obesity", "copd"};

struct PatientRecord {
  std::string id;
  int age = 0;
  Gender gender = Gender::Female;
  std::array<bool, kNumComorbidities> comorbidities{};
  std::vector<VitalsSample> vitals;  // day d lives at vitals[d-1]
  Outcome outcome;

  int last_day() const { return static_cast<int>(vitals.size()); }
  // last day the patient is present at the facility
  int exit_day() const {
    return outcome.kind == OutcomeKind::Present ? last_day() : outcome.day;
  }
};

struct Cohort {
  std::vector<PatientRecord> patients;
  std::vector<std::string> feature_names{kVitalNames.begin(), kVitalNames.end()};

  int max_day() const;
  int index_of(const std::string& id) const;  // -1 when absent
};

// Vitals of all patients present on one day, row-aligned with patient_rows.
// Missing measurements are NaN.
struct DayPanel {
  int day = 0;
  std::vector<int> patient_rows;  // indices into Cohort::patients, ascending
  Matrix values;                  // |patient_rows| x kNumVitals
};

struct RiskSet {
  int day = 0;
  std::vector<std::string> ids;
  std::vector<int> patient_rows;
  Matrix features;          // n x (kNumVitals * day), days 1..day concatenated
  std::vector<int> labels;  // 1 = transferred on `day`
};

// Per-feature generating distribution: group means/sds plus the fraction of
// measurements dropped as missing.
struct FeatureGen {
  double nonsevere_mean = 0.0;
  double nonsevere_sd = 1.0;
  double severe_mean = 0.0;
  double severe_sd = 1.0;
  double missing_rate = 0.0;
};

struct GenConfig {
  int n_patients = 632;
  double severe_fraction = 74.0 / 632.0;
  std::array<FeatureGen, kNumVitals> vitals{{
      {36.0, 0.63, 37.0, 0.50, 0.0548},   // bt
      {88.0, 11.0, 93.0, 11.0, 0.0698},   // pr
      {96.0, 1.11, 95.0, 1.91, 0.0493},   // spo2
      {85.0, 16.0, 81.0, 10.0, 0.8142},   // sbp
      {126.0, 14.0, 127.0, 13.0, 0.8144}, // dbp
  }};
  FeatureGen age{40.0, 19.0, 51.0, 20.0, 0.0};
  double female_rate_nonsevere = 0.49;
  double female_rate_severe = 0.46;
  std::array<double, kNumComorbidities> comorbidity_rate_nonsevere{0.047, 0.025, 0.034, 0.086};
  std::array<double, kNumComorbidities> comorbidity_rate_severe{0.150, 0.068, 0.054, 0.110};
  int max_stay_days = 14;
  double discharge_day_mean = 9.0;
  double discharge_day_sd = 3.0;
  // P(transfer on day d) for severe patients, d = 1..size(); renormalized
  std::vector<double> transfer_day_probs{0.28, 0.26, 0.20, 0.14, 0.05, 0.04, 0.02, 0.01};
  double ar1_phi = 0.5;
  // arrival-day fraction of the severe shift for a two-day stay; longer
  // stays start proportionally lower (see generator)
  double severe_onset_fraction = 0.55;
  std::uint64_t seed = 1;
};

// Reads and cross-validates the two-file cohort format. Rows are validated
// against the physiologic bounds; errors carry the offending line number.
Cohort load_cohort(const std::string& vitals_csv_path, const std::string& patients_csv_path);

void write_cohort_csv(const Cohort& cohort, const std::string& patients_csv_path,
                      const std::string& vitals_csv_path);

// Day-indexed panels of raw (NaN-masked) vitals for days 1..max_day.
std::vector<DayPanel> raw_day_panels(const Cohort& cohort);

// Prediction population for `day`: everyone still present at its start, with
// features concatenated from the imputed panels of days 1..day.
RiskSet risk_set(const Cohort& cohort, int day, const std::vector<DayPanel>& imputed_panels);

Cohort generate_synthetic_cohort(const GenConfig& cfg);

}  // namespace riskgraph
