#include "hivdyn/efficacy.hpp"

#include <algorithm>
#include <cmath>

#include "hivdyn/errors.hpp"

namespace hivdyn {

void IC50Profile::validate() const {
  if (!(i0 > 0.0) || !(ir > 0.0)) throw DomainError("IC50 values must be positive");
  if (tr && !(*tr > 0.0)) throw DomainError("resistance time must be positive");
}

void AdherenceProfile::validate() const {
  if (visit_times.empty()) throw DomainError("adherence profile has no visit times");
  for (std::size_t i = 1; i < visit_times.size(); ++i)
    if (!(visit_times[i] > visit_times[i - 1]))
      throw DomainError("adherence visit times must be strictly increasing");
  const std::size_t n = visit_times.size();
  if (rates.empty() || (rates.size() != n - 1 && rates.size() != n))
    throw DomainError("adherence profile needs one rate per interval");
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("adherence rate outside [0, 1]");
}

AdherenceProfile AdherenceProfile::full(double horizon) {
  return AdherenceProfile{{0.0, horizon}, {1.0}};
}

void EfficacyInputs::validate() const {
  for (const auto& d : drugs) {
    if (!(d.cmin >= 0.0) || !std::isfinite(d.cmin))
      throw DomainError("trough concentration must be finite and nonnegative");
    d.ic50.validate();
    d.adherence.validate();
  }
}

std::vector<double> EfficacyInputs::breakpoints() const {
  std::vector<double> bps;
  for (const auto& d : drugs) {
    for (double v : d.adherence.visit_times)
      if (v > 0.0) bps.push_back(v);
    if (d.ic50.tr) bps.push_back(*d.ic50.tr);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  return bps;
}

double ic50_at(const IC50Profile& profile, double t) {
  if (t < 0.0) throw DomainError("IC50 requested at negative time");
  if (!profile.tr) return profile.i0;
  const double tr = *profile.tr;
  if (t >= tr) return profile.ir;
  return profile.i0 + (profile.ir - profile.i0) * t / tr;
}

double adherence_at(const AdherenceProfile& profile, double t) {
  if (t < 0.0) throw DomainError("adherence requested at negative time");
  const auto& v = profile.visit_times;
  const auto& r = profile.rates;
  // index of the first visit time >= t; interval k is (v[k], v[k+1]]
  const auto it = std::lower_bound(v.begin(), v.end(), t);
  if (it == v.begin()) return r.front();
  const auto k = static_cast<std::size_t>(it - v.begin()) - 1;
  return r[std::min(k, r.size() - 1)];
}

double inhibitory_quotient(double cmin, double ic50) {
  if (!(ic50 > 0.0)) throw DomainError("IC50 must be positive");
  if (cmin < 0.0) throw DomainError("trough concentration must be nonnegative");
  return cmin / ic50;
}

namespace {

double emax(double phi, double s) {
  if (!(phi > 0.0)) throw DomainError("phi must be positive");
  return s / (phi + s);
}

}  // namespace

double gamma_at(const EfficacyInputs& inputs, double phi, double t) {
  double s = 0.0;
  for (const auto& d : inputs.drugs)
    s += inhibitory_quotient(d.cmin, ic50_at(d.ic50, t)) * adherence_at(d.adherence, t);
  return emax(phi, s);
}

double gamma_on_segment(const EfficacyInputs& inputs, double phi, double t, const Segment& seg) {
  const double probe = seg.probe();
  double s = 0.0;
  for (const auto& d : inputs.drugs)
    s += inhibitory_quotient(d.cmin, ic50_at(d.ic50, t)) * adherence_at(d.adherence, probe);
  return emax(phi, s);
}

EfficacyComponents efficacy_components(const EfficacyInputs& inputs, double phi, double t) {
  EfficacyComponents out;
  double s = 0.0;
  for (int d = 0; d < kDrugCount; ++d) {
    const auto& drug = inputs.drugs[d];
    out.ic50[d] = ic50_at(drug.ic50, t);
    out.adherence[d] = adherence_at(drug.adherence, t);
    out.iq[d] = inhibitory_quotient(drug.cmin, out.ic50[d]);
    s += out.iq[d] * out.adherence[d];
  }
  out.gamma = emax(phi, s);
  return out;
}

}  // namespace hivdyn
