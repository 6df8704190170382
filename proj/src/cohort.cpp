#include "hivdyn/cohort.hpp"

#include <cmath>
#include <cstdio>

#include "hivdyn/errors.hpp"
#include "hivdyn/samplers.hpp"

namespace hivdyn {

void CohortDesign::validate() const {
  if (n_subjects < 1) throw DomainError("cohort needs at least one subject");
  if (observation_days.empty() || observation_days.front() != 0.0)
    throw DomainError("observation days must start at day 0");
  for (std::size_t i = 1; i < observation_days.size(); ++i)
    if (observation_days[i] < observation_days[i - 1])
      throw DomainError("observation days must be nondecreasing");
  if (!(sigma_error >= 0.0)) throw DomainError("measurement SD must be nonnegative");
  if (max_redraws < 0) throw DomainError("redraw budget must be nonnegative");
}

namespace {

std::string subject_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
  return buf;
}

EfficacyInputs draw_efficacy(const EfficacyGenerator& g, const std::vector<double>& days,
                             Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  EfficacyInputs inputs;

  std::vector<double> visits;
  for (double d : days)
    if (visits.empty() || d > visits.back()) visits.push_back(d);
  if (visits.size() < 2) visits.push_back(visits.front() + 1.0);
  std::vector<double> rates;
  for (std::size_t k = 0; k + 1 < visits.size(); ++k)
    rates.push_back(uniform(rng) < g.lapse_probability
                        ? g.lapse_rate_min + (g.lapse_rate_max - g.lapse_rate_min) * uniform(rng)
                        : 1.0);

  const bool resistant = uniform(rng) < g.resistance_probability;
  const double tr =
      g.resistance_time_min + (g.resistance_time_max - g.resistance_time_min) * uniform(rng);
  for (int d = 0; d < kDrugCount; ++d) {
    auto& drug = inputs.drugs[d];
    drug.cmin = g.cmin_median[d] * std::exp(g.cmin_log_sd * normal(rng));
    drug.ic50.i0 = g.ic50_median[d] * std::exp(g.ic50_log_sd * normal(rng));
    const double fold = g.resistance_fold_median * std::exp(g.resistance_fold_log_sd * normal(rng));
    if (resistant) {
      drug.ic50.ir = drug.ic50.i0 * fold;
      drug.ic50.tr = tr;
    } else {
      drug.ic50.ir = drug.ic50.i0;
    }
    drug.adherence = {visits, rates};
  }
  return inputs;
}

}  // namespace

SimulatedCohort simulate_cohort(const CohortDesign& design, std::uint64_t seed) {
  design.validate();
  Eigen::LLT<ParamMatrix> llt(design.sigma_true);
  if (llt.info() != Eigen::Success)
    throw LinearAlgebraError("between-subject covariance is not positive definite");
  const ParamMatrix chol = llt.matrixL();

  SimulatedCohort out;
  for (std::size_t i = 0; i < design.n_subjects; ++i) {
    Rng rng = make_rng(seed, i + 1);
    std::normal_distribution<double> normal;

    SubjectRecord rec;
    rec.id = subject_id(i);
    const double baseline =
        design.baseline_log10_vl_mean + design.baseline_log10_vl_sd * normal(rng);
    rec.baselines.cd4 =
        std::max(10.0, design.baseline_cd4_mean + design.baseline_cd4_sd * normal(rng));
    rec.efficacy = draw_efficacy(design.efficacy, design.observation_days, rng);

    std::vector<double> pred;
    DynamicParams theta;
    int redraws = 0;
    for (;; ++redraws) {
      if (redraws > design.max_redraws)
        throw EvaluationError("subject " + rec.id + ": no evaluable parameter draw");
      ParamVector z;
      for (int k = 0; k < kParamCount; ++k) z[k] = normal(rng);
      const ParamVector v = design.mu_true + chol * z +
                            design.baseline_loading * (baseline - design.baseline_log10_vl_mean);
      theta = to_params(v);
      try {
        pred = predict_log10_viral_load(theta, rec.efficacy, std::pow(10.0, baseline),
                                        design.observation_days);
        break;
      } catch (const ConvergenceError&) {
      } catch (const DivergenceError&) {
      } catch (const EvaluationError&) {
      }
    }

    for (std::size_t j = 0; j < design.observation_days.size(); ++j) {
      const double day = design.observation_days[j];
      const double y = j == 0 ? baseline : pred[j] + design.sigma_error * normal(rng);
      rec.observations.push_back({day, y});
    }
    out.subjects.push_back(std::move(rec));
    out.truth.push_back(theta);
    out.redraws.push_back(redraws);
  }
  return out;
}

const char* to_string(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::success:
      return "success";
    case ResponseStatus::failure:
      return "failure";
    case ResponseStatus::missing:
      return "missing";
  }
  return "missing";
}

ResponseStatus classify_response(const SubjectRecord& record) {
  std::vector<Observation> obs;
  for (const auto& o : record.observations)
    if (o.day <= kStudyEndDay) obs.push_back(o);
  if (obs.empty()) return ResponseStatus::missing;

  const double cut = std::log10(kResponseThresholdCopies);
  for (std::size_t j = 0; j + 1 < obs.size(); ++j)
    if (obs[j].log10_vl < cut && obs[j + 1].log10_vl < cut) return ResponseStatus::success;

  const double baseline = obs.front().log10_vl;
  for (std::size_t j = 0; j + 1 < obs.size(); ++j) {
    if (obs[j].day > kEarlyFailureDay) break;
    const bool high = obs[j].log10_vl >= cut && obs[j + 1].log10_vl >= cut;
    const bool small_drop =
        baseline - obs[j].log10_vl < 1.0 && baseline - obs[j + 1].log10_vl < 1.0;
    if (high && small_drop) return ResponseStatus::failure;
  }
  if (record.observations.back().day >= kStudyEndDay) return ResponseStatus::failure;
  return ResponseStatus::missing;
}

}  // namespace hivdyn
