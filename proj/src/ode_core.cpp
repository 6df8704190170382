#include "hivdyn/ode_core.hpp"

#include <cmath>
#include <string>

#include "hivdyn/errors.hpp"

namespace hivdyn {

namespace {

struct Rates {
  double d_T, delta, c, R0;
};

Rates rates_of(const DynamicParams& p) { return {p.d_T(), p.delta(), p.c(), p.R0()}; }

inline OdeState<3> rescaled_derivative(const OdeState<3>& y, double gamma, const Rates& r) {
  const double infection = (1.0 - gamma) * y[0] * y[2];
  return {r.d_T * (1.0 - y[0] - infection), r.delta * (infection - y[1]),
          r.c * (r.R0 * y[1] - y[2])};
}

void require_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw NonFiniteInputError(std::string("non-finite ") + what);
}

double checked_gamma(const EfficacyFunction& gamma, double t) {
  const double g = gamma(t);
  if (!(g >= 0.0 && g <= 1.0)) throw DomainError("efficacy outside [0, 1]");
  return g;
}

}  // namespace

void DynamicParams::validate() const {
  for (double v : to_array())
    if (!std::isfinite(v)) throw NonFiniteInputError("dynamic parameter is not finite");
}

void OriginalParams::validate() const {
  for (double v : {lambda, d_T, k, delta, n_burst, c})
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("original-model parameters must be positive");
}

StateVector rhs_rescaled(const StateVector& state, double t, const DynamicParams& params,
                         const EfficacyFunction& gamma) {
  require_finite({state.t_cells, state.infected_cells, state.virus, t}, "state");
  params.validate();
  const auto d = rescaled_derivative({state.t_cells, state.infected_cells, state.virus},
                                     checked_gamma(gamma, t), rates_of(params));
  return {d[0], d[1], d[2]};
}

OriginalState rhs_original(const OriginalState& state, double t, const OriginalParams& params,
                           const EfficacyFunction& gamma) {
  require_finite({state.t_cells, state.infected_cells, state.virus, t}, "state");
  const double g = checked_gamma(gamma, t);
  const double infection = (1.0 - g) * params.k * state.t_cells * state.virus;
  return {params.lambda - params.d_T * state.t_cells - infection,
          infection - params.delta * state.infected_cells,
          params.n_burst * params.delta * state.infected_cells - params.c * state.virus};
}

StateVector initial_state_rescaled(double v0_tilde) {
  if (!std::isfinite(v0_tilde)) throw NonFiniteInputError("non-finite baseline virus");
  if (v0_tilde < 0.0) throw DomainError("baseline rescaled viral load must be nonnegative");
  return {1.0 / (1.0 + v0_tilde), v0_tilde / (1.0 + v0_tilde), v0_tilde};
}

OriginalState initial_state_original(const OriginalParams& p) {
  p.validate();
  const double v0 = p.lambda * p.n_burst / p.c - p.d_T / p.k;
  if (!(v0 > 0.0))
    throw InfeasibleSteadyStateError("pretreatment steady state has no virus (R0 <= 1)");
  return {p.c / (p.k * p.n_burst), p.c * v0 / (p.delta * p.n_burst), v0};
}

StateVector rescale(const OriginalState& s, const OriginalParams& p) {
  return {p.d_T / p.lambda * s.t_cells, p.delta / p.lambda * s.infected_cells,
          p.k / p.d_T * s.virus};
}

double efficacy_threshold(double r0) {
  if (!(r0 > 0.0)) throw DomainError("R0 must be positive");
  return 1.0 - 1.0 / r0;
}

double half_life(double rate) {
  if (!(rate > 0.0)) throw DomainError("rate must be positive");
  return std::log(2.0) / rate;
}

std::vector<StateVector> integrate_rescaled(const DynamicParams& params,
                                            const SegmentEfficacy& gamma,
                                            const StateVector& state0,
                                            const std::vector<double>& times,
                                            const IntegratorConfig& config) {
  params.validate();
  const Rates r = rates_of(params);
  auto rhs = [&](double t, const OdeState<3>& y, const Segment& seg) {
    return rescaled_derivative(y, gamma(t, seg), r);
  };
  const auto traj = integrate<3>(rhs, {state0.t_cells, state0.infected_cells, state0.virus},
                                 times, config);
  std::vector<StateVector> out;
  out.reserve(traj.states.size());
  for (const auto& y : traj.states) out.push_back({y[0], y[1], y[2]});
  return out;
}

std::vector<double> predict_log10_viral_load(const DynamicParams& theta,
                                             const EfficacyInputs& inputs, double baseline_vl,
                                             const std::vector<double>& times,
                                             const IntegratorConfig& base_config) {
  if (!(baseline_vl > 0.0) || !std::isfinite(baseline_vl))
    throw DomainError("baseline viral load must be positive");
  theta.validate();
  if (times.empty()) return {};

  const double rho_scale = kViralLoadUnit * theta.rho();
  const StateVector s0 = initial_state_rescaled(baseline_vl / rho_scale);
  const double phi = theta.phi();
  const Rates r = rates_of(theta);

  IntegratorConfig config = base_config;
  if (config.breakpoints.empty()) config.breakpoints = inputs.breakpoints();

  const bool prepend_origin = times.front() > 0.0;
  std::vector<double> grid;
  if (prepend_origin) {
    grid.reserve(times.size() + 1);
    grid.push_back(0.0);
  }
  grid.insert(grid.end(), times.begin(), times.end());
  if (grid.front() < 0.0) throw DomainError("prediction times must be nonnegative");

  auto rhs = [&](double t, const OdeState<3>& y, const Segment& seg) {
    return rescaled_derivative(y, gamma_on_segment(inputs, phi, t, seg), r);
  };
  const auto traj = integrate<3>(rhs, {s0.t_cells, s0.infected_cells, s0.virus}, grid, config);

  std::vector<double> out;
  out.reserve(times.size());
  for (std::size_t i = prepend_origin ? 1 : 0; i < traj.states.size(); ++i) {
    const double v = traj.states[i][2];
    if (!(v > 0.0))
      throw EvaluationError("nonpositive predicted viral load at t=" +
                            std::to_string(traj.times[i]));
    out.push_back(std::log10(rho_scale * v));
  }
  return out;
}

}  // namespace hivdyn
