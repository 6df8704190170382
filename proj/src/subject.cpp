#include "hivdyn/subject.hpp"

#include <cmath>

#include "hivdyn/errors.hpp"

namespace hivdyn {

std::vector<double> SubjectRecord::days() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.day);
  return out;
}

void SubjectRecord::validate() const {
  if (observations.empty()) throw DomainError("subject " + id + " has no observations");
  if (observations.front().day != 0.0)
    throw DomainError("subject " + id + ": first observation must be at day 0");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (!std::isfinite(observations[i].log10_vl) || !std::isfinite(observations[i].day))
      throw NonFiniteInputError("subject " + id + ": non-finite observation");
    if (i > 0 && observations[i].day < observations[i - 1].day)
      throw DomainError("subject " + id + ": observation days must be nondecreasing");
  }
  efficacy.validate();
}

}  // namespace hivdyn
