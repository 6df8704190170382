#pragma once

// Three-stage hierarchical model: Gaussian log10 viral-load errors around
// the ODE prediction, Gaussian random effects on the log parameters, and
// Gamma / Normal / Wishart hyperpriors.

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "hivdyn/integrator.hpp"
#include "hivdyn/ode_core.hpp"
#include "hivdyn/subject.hpp"

namespace hivdyn {

using ParamVector = Eigen::Matrix<double, kParamCount, 1>;
using ParamMatrix = Eigen::Matrix<double, kParamCount, kParamCount>;

inline ParamVector to_vector(const DynamicParams& p) {
  const auto a = p.to_array();
  return Eigen::Map<const ParamVector>(a.data());
}

inline DynamicParams to_params(const ParamVector& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

struct Hyperpriors {
  double a = 4.5;  // Gamma shape for the error precision
  double b = 9.0;  // Gamma scale for the error precision
  ParamVector eta = ParamVector::Zero();
  ParamMatrix lambda = ParamMatrix::Identity();
  ParamMatrix omega = ParamMatrix::Identity();
  double nu = 8.0;

  // Default hyperparameters.
  static Hyperpriors defaults();
  void validate() const;
};

struct PopulationState {
  ParamVector mu = ParamVector::Zero();
  ParamMatrix sigma_inv = ParamMatrix::Identity();
  double error_prec = 1.0;

  void validate() const;
};

// Likelihood view of one subject: the residual sum of squares as a function
// of the log parameters, plus the number of observations it sums over.
// residual_ss returns +inf when the model cannot be evaluated.
struct SubjectLikelihood {
  std::string id;
  std::size_t observation_count = 0;
  std::function<double(const ParamVector&)> residual_ss;
};

// Integrator settings used inside the likelihood. The step budget is kept
// finite so extreme proposals fail fast instead of stalling the chain.
IntegratorConfig likelihood_integrator_config();

// Observations that inform the likelihood: every observation after the
// day-0 anchor, whose residual is zero by construction.
std::size_t informative_observation_count(const SubjectRecord& subject);

// Sum of squared log10 residuals over the informative observations; +inf on
// solver divergence or evaluation failure.
double residual_sum_of_squares(const DynamicParams& theta, const SubjectRecord& subject,
                               const IntegratorConfig& config = likelihood_integrator_config());

SubjectLikelihood make_subject_likelihood(
    const SubjectRecord& subject, IntegratorConfig config = likelihood_integrator_config());

// Full Gaussian log-likelihood of the informative observations; -inf on
// solver divergence.
double log_likelihood_subject(const DynamicParams& theta, const SubjectRecord& subject,
                              double error_prec);

// Unnormalised log full conditional of theta_i:
//   -(prec/2) SSR(theta) - 1/2 (theta - mu)' Sigma^{-1} (theta - mu)
double log_target_theta(const DynamicParams& theta, const SubjectRecord& subject,
                        const PopulationState& pop);
double log_target_from_ssr(double ssr, const ParamVector& theta, const PopulationState& pop);

}  // namespace hivdyn
