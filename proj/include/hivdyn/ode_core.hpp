#pragma once

// Target-cell limited viral dynamics under time-varying drug efficacy, in the
// original (T, T*, V) form and in the rescaled identifiable form driven by
// (phi, c, delta, d_T, rho, R0).

#include <array>
#include <cmath>
#include <functional>
#include <string_view>
#include <vector>

#include "hivdyn/efficacy.hpp"
#include "hivdyn/integrator.hpp"

namespace hivdyn {

inline constexpr int kParamCount = 6;
inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "phi", "c", "delta", "d_T", "rho", "R0"};

// Predicted copies/mL = kViralLoadUnit * rho * rescaled virus.
inline constexpr double kViralLoadUnit = 1.0e4;

// Rescaled state (T~, T*~, V~), all dimensionless.
struct StateVector {
  double t_cells = 0.0;
  double infected_cells = 0.0;
  double virus = 0.0;

  bool operator==(const StateVector&) const = default;
};

// Unrescaled state (T, T*, V).
struct OriginalState {
  double t_cells = 0.0;
  double infected_cells = 0.0;
  double virus = 0.0;
};

// Per-subject log-scale dynamic parameters, ordered as kParamNames.
struct DynamicParams {
  double log_phi = 0.0;
  double log_c = 0.0;
  double log_delta = 0.0;
  double log_dT = 0.0;
  double log_rho = 0.0;
  double log_R0 = 0.0;

  double phi() const { return std::exp(log_phi); }
  double c() const { return std::exp(log_c); }
  double delta() const { return std::exp(log_delta); }
  double d_T() const { return std::exp(log_dT); }
  double rho() const { return std::exp(log_rho); }
  double R0() const { return std::exp(log_R0); }

  std::array<double, kParamCount> to_array() const {
    return {log_phi, log_c, log_delta, log_dT, log_rho, log_R0};
  }
  static DynamicParams from_array(const std::array<double, kParamCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  // Builds from natural-scale values.
  static DynamicParams natural(double phi, double c, double delta, double d_T, double rho,
                               double R0) {
    return {std::log(phi), std::log(c), std::log(delta), std::log(d_T), std::log(rho),
            std::log(R0)};
  }

  void validate() const;
  bool operator==(const DynamicParams&) const = default;
};

struct OriginalParams {
  double lambda = 0.0;   // target-cell source, cells/day
  double d_T = 0.0;      // target-cell death, 1/day
  double k = 0.0;        // infection rate, mL/(day virion)
  double delta = 0.0;    // infected-cell death, 1/day
  double n_burst = 0.0;  // virions per infected cell
  double c = 0.0;        // virion clearance, 1/day

  void validate() const;
  double R0() const { return k * n_burst * lambda / (c * d_T); }
};

using EfficacyFunction = std::function<double(double)>;

StateVector rhs_rescaled(const StateVector& state, double t, const DynamicParams& params,
                         const EfficacyFunction& gamma);
OriginalState rhs_original(const OriginalState& state, double t, const OriginalParams& params,
                           const EfficacyFunction& gamma);

StateVector initial_state_rescaled(double v0_tilde);
OriginalState initial_state_original(const OriginalParams& params);

// (d_T/lambda) T, (delta/lambda) T*, (k/d_T) V.
StateVector rescale(const OriginalState& state, const OriginalParams& params);

double efficacy_threshold(double r0);
double half_life(double rate);

// Integrates the rescaled system with gamma supplied per breakpoint segment.
// Returns one state per requested time.
using SegmentEfficacy = std::function<double(double, const Segment&)>;
std::vector<StateVector> integrate_rescaled(const DynamicParams& params,
                                            const SegmentEfficacy& gamma,
                                            const StateVector& state0,
                                            const std::vector<double>& times,
                                            const IntegratorConfig& config);

// log10 predicted viral load at `times` (days, nondecreasing, starting at 0).
// The initial condition is anchored to baseline_vl (copies/mL) through
// V~0 = baseline_vl / (kViralLoadUnit * rho).
std::vector<double> predict_log10_viral_load(const DynamicParams& theta,
                                             const EfficacyInputs& inputs, double baseline_vl,
                                             const std::vector<double>& times,
                                             const IntegratorConfig& base_config = {});

}  // namespace hivdyn
