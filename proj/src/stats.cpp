#include "hivdyn/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "hivdyn/errors.hpp"

namespace hivdyn {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t distribution needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("spearman: vectors differ in length");
  if (x.size() < 3) throw DomainError("spearman: need at least three pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("spearman: constant input has no rank correlation");
  CorrelationResult out;
  out.n = x.size();
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(out.rho) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.rho * std::sqrt((n - 2.0) / (1.0 - out.rho * out.rho));
    out.p_value = student_t_two_sided_p(t, n - 2.0);
  }
  return out;
}

namespace {

// Two-sided exact p of the rank sum by counting subsets of the pooled
// (doubled, hence integral) ranks with a size/sum dynamic programme.
double exact_rank_sum_p(const std::vector<long>& doubled_ranks, std::size_t na, long observed) {
  const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  std::vector<std::vector<double>> count(na + 1, std::vector<double>(total + 1, 0.0));
  count[0][0] = 1.0;
  for (long r : doubled_ranks)
    for (std::size_t k = na; k >= 1; --k)
      for (long s = total; s >= r; --s) count[k][s] += count[k - 1][s - r];
  double all = 0.0, lower = 0.0, upper = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double c = count[na][s];
    all += c;
    if (s <= observed) lower += c;
    if (s >= observed) upper += c;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

}  // namespace

RankSumResult wilcoxon_rank_sum(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.empty() || group_b.empty())
    throw InsufficientDataError("rank-sum test needs two nonempty groups");
  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const auto ranks = average_ranks(pooled);
  const std::size_t na = group_a.size(), nb = group_b.size(), n = na + nb;

  RankSumResult out;
  for (std::size_t i = 0; i < na; ++i) out.statistic += ranks[i];
  out.expected = static_cast<double>(na) * static_cast<double>(n + 1) / 2.0;

  if (n <= kExactRankSumLimit) {
    std::vector<long> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = std::lround(2.0 * ranks[i]);
    out.p_value = exact_rank_sum_p(doubled, na, std::lround(2.0 * out.statistic));
    out.exact = true;
    return out;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                     ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (!(var > 0.0)) {
    out.p_value = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(out.statistic - out.expected) - 0.5) / std::sqrt(var);
  out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

}  // namespace hivdyn
