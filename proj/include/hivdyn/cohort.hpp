#pragma once

// Synthetic cohorts drawn from the hierarchical model, and protocol-style
// virologic response classification.

#include <cstdint>
#include <vector>

#include "hivdyn/model.hpp"
#include "hivdyn/subject.hpp"

namespace hivdyn {

// Distributions for per-subject efficacy inputs. Log-normal quantities are
// given by their median and log-scale SD.
struct EfficacyGenerator {
  std::array<double, kDrugCount> cmin_median = {80.0, 50.0};
  double cmin_log_sd = 0.3;
  std::array<double, kDrugCount> ic50_median = {8.0, 5.0};
  double ic50_log_sd = 0.3;
  // Fraction of subjects whose IC50 rises to a resistant level.
  double resistance_probability = 0.35;
  double resistance_fold_median = 4.0;
  double resistance_fold_log_sd = 0.4;
  // Resistance time is uniform over this window (days).
  double resistance_time_min = 56.0;
  double resistance_time_max = 168.0;
  // Probability that an adherence interval is a lapse, and the lapse rate range.
  double lapse_probability = 0.15;
  double lapse_rate_min = 0.3;
  double lapse_rate_max = 0.95;
};

struct CohortDesign {
  std::size_t n_subjects = 42;
  std::vector<double> observation_days = {0, 7, 14, 28, 56, 84, 112, 140, 168};
  ParamVector mu_true = Hyperpriors::defaults().eta;
  ParamMatrix sigma_true = ParamMatrix::Identity() * 0.04;
  double sigma_error = 0.25;  // log10 measurement SD
  double baseline_log10_vl_mean = 4.6;
  double baseline_log10_vl_sd = 0.5;
  double baseline_cd4_mean = 250.0;
  double baseline_cd4_sd = 100.0;
  // theta_i is shifted by this loading times the centred baseline log10 VL,
  // which lets a cohort carry a baseline/parameter association.
  ParamVector baseline_loading = ParamVector::Zero();
  EfficacyGenerator efficacy;
  int max_redraws = 50;

  void validate() const;
};

struct SimulatedCohort {
  std::vector<SubjectRecord> subjects;
  std::vector<DynamicParams> truth;
  std::vector<int> redraws;  // parameter redraws needed per subject
};

// Draws theta_i ~ N(mu_true, Sigma_true), efficacy inputs and a baseline
// viral load, integrates the rescaled model and adds N(0, sigma^2) noise to
// every post-baseline log10 value. The day-0 value is the noise-free
// baseline that anchors the initial condition.
SimulatedCohort simulate_cohort(const CohortDesign& design, std::uint64_t seed);

enum class ResponseStatus { success, failure, missing };

const char* to_string(ResponseStatus s);

// Viral-load response over a 24-week study, using a 200 copies/mL cut-off:
//  success  two adjacent scheduled measurements below 200 by week 24;
//  failure  otherwise, if two adjacent measurements >= 200 with the first at
//           or before week 8 and both less than 1.0 log10 below baseline, or
//           the record reaches week 24;
//  missing  when neither can be determined.
ResponseStatus classify_response(const SubjectRecord& record);

inline constexpr double kResponseThresholdCopies = 200.0;
inline constexpr double kStudyEndDay = 168.0;
inline constexpr double kEarlyFailureDay = 56.0;

}  // namespace hivdyn
