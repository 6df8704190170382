#pragma once

// Posterior summaries on the natural (exponentiated) parameter scale.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hivdyn/mcmc.hpp"

namespace hivdyn {

struct ParamSummary {
  double mean = 0.0;
  double lower = 0.0;  // 2.5% quantile
  double upper = 0.0;  // 97.5% quantile
};

// Mean and 95% equal-tail interval of a sample.
ParamSummary summarize_sample(std::span<const double> draws);

// Linear-interpolation empirical quantile (type 7), p in [0, 1].
double quantile(std::vector<double> values, double p);

// Spread of per-subject estimates across the cohort. SD uses n - 1.
struct CohortSpread {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double cv_percent = 0.0;  // 100 * SD / mean
};

CohortSpread describe(std::span<const double> values);

struct SubjectSummary {
  std::string id;
  std::array<ParamSummary, kParamCount> params;
};

struct ChainSummary {
  std::array<ParamSummary, kParamCount> population;  // exp(mu)
  ParamSummary error_sd;                              // sigma = (sigma^{-2})^{-1/2}
  std::vector<SubjectSummary> subjects;
  std::array<CohortSpread, kParamCount> across_subjects;  // of subject posterior means
  std::size_t draws = 0;
};

ChainSummary summarize(const ChainOutput& chain);

}  // namespace hivdyn
