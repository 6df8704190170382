#include "hivdyn/analysis.hpp"

#include <functional>

#include "hivdyn/errors.hpp"
#include "hivdyn/summary.hpp"

namespace hivdyn {

BaselineFactors baseline_factors(const SubjectRecord& record) {
  return {record.id, record.baseline_log10_vl(), record.baselines.cd4, record.baselines.age,
          record.baselines.weight};
}

std::vector<CorrelationRow> correlate_baseline(const std::vector<FittedSubject>& fitted,
                                               const std::vector<BaselineFactors>& baselines) {
  std::map<std::string, const BaselineFactors*> by_id;
  for (const auto& b : baselines) by_id[b.id] = &b;
  for (const auto& f : fitted)
    if (!by_id.count(f.id)) throw JoinError("no baseline factors for subject " + f.id);

  using Getter = std::function<std::optional<double>(const BaselineFactors&)>;
  const std::vector<std::pair<std::string, Getter>> factors = {
      {"baseline_log10_vl", [](const BaselineFactors& b) { return std::optional(b.log10_vl); }},
      {"baseline_cd4", [](const BaselineFactors& b) { return b.cd4; }},
      {"age", [](const BaselineFactors& b) { return b.age; }},
      {"weight", [](const BaselineFactors& b) { return b.weight; }},
  };

  std::vector<CorrelationRow> rows;
  for (const auto& [name, get] : factors) {
    std::vector<double> x;
    std::vector<const FittedSubject*> used;
    for (const auto& f : fitted) {
      if (const auto v = get(*by_id.at(f.id))) {
        x.push_back(*v);
        used.push_back(&f);
      }
    }
    if (x.size() < 3) continue;
    for (int k = 0; k < kParamCount; ++k) {
      std::vector<double> y;
      for (const auto* f : used) y.push_back(f->estimates[k]);
      rows.push_back({name, std::string(kParamNames[k]), spearman(x, y)});
    }
  }
  return rows;
}

GroupComparison compare_groups(const std::vector<FittedSubject>& fitted,
                               const std::map<std::string, ResponseStatus>& statuses) {
  GroupComparison out;
  std::vector<const FittedSubject*> success, failure;
  for (const auto& f : fitted) {
    const auto it = statuses.find(f.id);
    if (it == statuses.end()) throw JoinError("no response status for subject " + f.id);
    switch (it->second) {
      case ResponseStatus::success:
        success.push_back(&f);
        break;
      case ResponseStatus::failure:
        failure.push_back(&f);
        break;
      case ResponseStatus::missing:
        ++out.excluded_missing;
        break;
    }
  }
  out.n_success = success.size();
  out.n_failure = failure.size();
  if (success.empty() || failure.empty())
    throw InsufficientDataError("group comparison needs both success and failure subjects");

  for (int k = 0; k < kParamCount; ++k) {
    std::vector<double> a, b;
    for (const auto* f : success) a.push_back(f->estimates[k]);
    for (const auto* f : failure) b.push_back(f->estimates[k]);
    out.rows.push_back(
        {std::string(kParamNames[k]), wilcoxon_rank_sum(a, b), quantile(a, 0.5), quantile(b, 0.5)});
  }
  return out;
}

}  // namespace hivdyn
