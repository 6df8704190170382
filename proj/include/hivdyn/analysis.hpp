#pragma once

// Post-hoc analyses of fitted subject parameters: rank correlations with
// baseline factors and success-versus-failure comparisons.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hivdyn/cohort.hpp"
#include "hivdyn/stats.hpp"

namespace hivdyn {

// Per-subject point estimates on the natural scale, ordered as kParamNames.
struct FittedSubject {
  std::string id;
  std::array<double, kParamCount> estimates{};
};

struct BaselineFactors {
  std::string id;
  double log10_vl = 0.0;
  std::optional<double> cd4;
  std::optional<double> age;
  std::optional<double> weight;
};

BaselineFactors baseline_factors(const SubjectRecord& record);

struct CorrelationRow {
  std::string factor;
  std::string parameter;
  CorrelationResult result;
};

// Spearman correlation of every available baseline factor with every
// parameter. Factors recorded for fewer than three subjects are skipped.
std::vector<CorrelationRow> correlate_baseline(const std::vector<FittedSubject>& fitted,
                                               const std::vector<BaselineFactors>& baselines);

struct GroupComparisonRow {
  std::string parameter;
  RankSumResult result;  // statistic is the rank sum of the success group
  double median_success = 0.0;
  double median_failure = 0.0;
};

struct GroupComparison {
  std::vector<GroupComparisonRow> rows;
  std::size_t n_success = 0;
  std::size_t n_failure = 0;
  std::size_t excluded_missing = 0;
};

GroupComparison compare_groups(const std::vector<FittedSubject>& fitted,
                               const std::map<std::string, ResponseStatus>& statuses);

}  // namespace hivdyn
