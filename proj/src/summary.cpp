#include "hivdyn/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hivdyn/errors.hpp"

namespace hivdyn {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ParamSummary summarize_sample(std::span<const double> draws) {
  if (draws.empty()) throw InsufficientDataError("summary of an empty sample");
  std::vector<double> v(draws.begin(), draws.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return {mean, quantile(v, 0.025), quantile(v, 0.975)};
}

CohortSpread describe(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("describe of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  CohortSpread s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.median = quantile(v, 0.5);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  s.cv_percent = s.mean != 0.0 ? 100.0 * s.sd / s.mean : 0.0;
  return s;
}

ChainSummary summarize(const ChainOutput& chain) {
  if (chain.population_draws.empty()) throw InsufficientDataError("chain has no retained draws");
  ChainSummary out;
  out.draws = chain.population_draws.size();
  std::vector<double> buf(out.draws);

  for (int k = 0; k < kParamCount; ++k) {
    for (std::size_t d = 0; d < out.draws; ++d) buf[d] = std::exp(chain.population_draws[d].mu[k]);
    out.population[k] = summarize_sample(buf);
  }
  for (std::size_t d = 0; d < out.draws; ++d)
    buf[d] = 1.0 / std::sqrt(chain.population_draws[d].error_prec);
  out.error_sd = summarize_sample(buf);

  std::array<std::vector<double>, kParamCount> means;
  for (std::size_t i = 0; i < chain.subject_ids.size(); ++i) {
    const auto& draws = chain.subject_draws[i];
    SubjectSummary s;
    s.id = chain.subject_ids[i];
    std::vector<double> sb(draws.size());
    for (int k = 0; k < kParamCount; ++k) {
      for (std::size_t d = 0; d < draws.size(); ++d) sb[d] = std::exp(draws[d][k]);
      s.params[k] = summarize_sample(sb);
      means[k].push_back(s.params[k].mean);
    }
    out.subjects.push_back(std::move(s));
  }
  if (!out.subjects.empty())
    for (int k = 0; k < kParamCount; ++k) out.across_subjects[k] = describe(means[k]);
  return out;
}

}  // namespace hivdyn
