#include "hivdyn/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hivdyn/errors.hpp"

namespace hivdyn {

namespace {

bool is_spd(const ParamMatrix& m) {
  if (!m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::LLT<ParamMatrix> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

Hyperpriors Hyperpriors::defaults() {
  Hyperpriors h;
  h.a = 4.5;
  h.b = 9.0;
  h.nu = 8.0;
  h.eta << 4.0, 1.1, -1.0, -2.5, 1.4, 0.28;
  h.lambda = ParamMatrix::Identity() * 1000.0;
  h.omega = ParamMatrix::Identity() * 2.0;
  return h;
}

void Hyperpriors::validate() const {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("Gamma hyperparameters must be positive");
  if (!eta.allFinite()) throw NonFiniteInputError("prior mean is not finite");
  if (!is_spd(lambda)) throw LinearAlgebraError("prior covariance of mu is not SPD");
  if (!is_spd(omega)) throw LinearAlgebraError("Wishart scale matrix is not SPD");
  if (!(nu > kParamCount - 1)) throw DomainError("Wishart degrees of freedom too small");
}

void PopulationState::validate() const {
  if (!mu.allFinite()) throw NonFiniteInputError("population mean is not finite");
  if (!is_spd(sigma_inv)) throw LinearAlgebraError("population precision is not SPD");
  if (!(error_prec > 0.0)) throw DomainError("error precision must be positive");
}

IntegratorConfig likelihood_integrator_config() {
  IntegratorConfig c;
  c.rel_tol = 1e-6;
  c.abs_tol = 1e-8;
  c.max_steps = 20000;
  return c;
}

std::size_t informative_observation_count(const SubjectRecord& subject) {
  return subject.observations.empty() ? 0 : subject.observations.size() - 1;
}

double residual_sum_of_squares(const DynamicParams& theta, const SubjectRecord& subject,
                               const IntegratorConfig& config) {
  const auto& obs = subject.observations;
  if (obs.size() < 2) return 0.0;
  std::vector<double> days = subject.days();
  try {
    const auto pred =
        predict_log10_viral_load(theta, subject.efficacy, std::pow(10.0, obs.front().log10_vl),
                                 days, config);
    double ssr = 0.0;
    for (std::size_t j = 1; j < obs.size(); ++j) {
      const double r = obs[j].log10_vl - pred[j];
      ssr += r * r;
    }
    return std::isfinite(ssr) ? ssr : std::numeric_limits<double>::infinity();
  } catch (const ConvergenceError&) {
  } catch (const DivergenceError&) {
  } catch (const EvaluationError&) {
  } catch (const NonFiniteInputError&) {
  }
  return std::numeric_limits<double>::infinity();
}

SubjectLikelihood make_subject_likelihood(const SubjectRecord& subject, IntegratorConfig config) {
  if (config.breakpoints.empty()) config.breakpoints = subject.efficacy.breakpoints();
  return {subject.id, informative_observation_count(subject),
          [subject, config](const ParamVector& theta) {
            return residual_sum_of_squares(to_params(theta), subject, config);
          }};
}

double log_likelihood_subject(const DynamicParams& theta, const SubjectRecord& subject,
                              double error_prec) {
  if (!(error_prec > 0.0)) throw DomainError("error precision must be positive");
  const double ssr = residual_sum_of_squares(theta, subject);
  if (!std::isfinite(ssr)) return -std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(informative_observation_count(subject));
  return m * 0.5 * std::log(error_prec / (2.0 * std::numbers::pi)) - 0.5 * error_prec * ssr;
}

double log_target_from_ssr(double ssr, const ParamVector& theta, const PopulationState& pop) {
  if (!std::isfinite(ssr)) return -std::numeric_limits<double>::infinity();
  const ParamVector d = theta - pop.mu;
  return -0.5 * pop.error_prec * ssr - 0.5 * d.dot(pop.sigma_inv * d);
}

double log_target_theta(const DynamicParams& theta, const SubjectRecord& subject,
                        const PopulationState& pop) {
  return log_target_from_ssr(residual_sum_of_squares(theta, subject), to_vector(theta), pop);
}

}  // namespace hivdyn
