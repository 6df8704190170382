#pragma once

// Time-varying antiretroviral efficacy built from trough concentrations,
// pill-count adherence and a resistance-driven IC50 profile for two drugs.

#include <array>
#include <optional>
#include <vector>

#include "hivdyn/integrator.hpp"

namespace hivdyn {

// IC50 rising linearly from i0 at baseline to ir at the resistance time tr,
// then held at ir. Without tr the profile is constant at i0.
struct IC50Profile {
  double i0 = 1.0;
  double ir = 1.0;
  std::optional<double> tr;

  void validate() const;
  bool operator==(const IC50Profile&) const = default;
};

// Adherence rates on half-open intervals (T_k, T_{k+1}]. When rates has as
// many entries as visit_times, the last rate covers the trailing open
// interval (T_last, inf).
struct AdherenceProfile {
  std::vector<double> visit_times;
  std::vector<double> rates;

  void validate() const;
  bool operator==(const AdherenceProfile&) const = default;

  // Fully adherent over [0, horizon].
  static AdherenceProfile full(double horizon);
};

struct DrugInputs {
  double cmin = 0.0;
  IC50Profile ic50;
  AdherenceProfile adherence;

  bool operator==(const DrugInputs&) const = default;
};

inline constexpr int kDrugCount = 2;

struct EfficacyInputs {
  std::array<DrugInputs, kDrugCount> drugs;

  void validate() const;
  bool operator==(const EfficacyInputs&) const = default;

  // Discontinuity points of gamma(t): adherence visit times and resistance
  // times of both drugs, strictly increasing and positive.
  std::vector<double> breakpoints() const;
};

double ic50_at(const IC50Profile& profile, double t);
double adherence_at(const AdherenceProfile& profile, double t);
double inhibitory_quotient(double cmin, double ic50);

// gamma(t) = S / (phi + S) with S = sum_d IQ_d(t) A_d(t).
double gamma_at(const EfficacyInputs& inputs, double phi, double t);

// Same as gamma_at but resolves adherence on the given breakpoint segment,
// so that evaluations at a segment endpoint use the segment's own rate.
double gamma_on_segment(const EfficacyInputs& inputs, double phi, double t, const Segment& seg);

// Per-drug components at one time point, for plot-ready efficacy series.
struct EfficacyComponents {
  std::array<double, kDrugCount> ic50{};
  std::array<double, kDrugCount> adherence{};
  std::array<double, kDrugCount> iq{};
  double gamma = 0.0;
};

EfficacyComponents efficacy_components(const EfficacyInputs& inputs, double phi, double t);

}  // namespace hivdyn
