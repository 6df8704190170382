#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hivdyn/efficacy.hpp"

namespace hivdyn {

struct Observation {
  double day = 0.0;
  double log10_vl = 0.0;  // log10 copies/mL

  bool operator==(const Observation&) const = default;
};

struct Baselines {
  std::optional<double> cd4;     // cells/mm^3
  std::optional<double> age;     // years
  std::optional<double> weight;  // kg

  bool operator==(const Baselines&) const = default;
};

// One subject's longitudinal viral loads and efficacy inputs. The first
// observation (day 0) anchors the initial condition of the model.
struct SubjectRecord {
  std::string id;
  std::vector<Observation> observations;
  EfficacyInputs efficacy;
  Baselines baselines;

  double baseline_log10_vl() const { return observations.front().log10_vl; }
  std::vector<double> days() const;

  // Days nondecreasing, first at day 0, at least one observation, and
  // efficacy inputs valid.
  void validate() const;

  bool operator==(const SubjectRecord&) const = default;
};

}  // namespace hivdyn
