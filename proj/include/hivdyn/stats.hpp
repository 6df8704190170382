#pragma once

// Rank-based tests used for the post-hoc analyses.

#include <cstddef>
#include <span>
#include <vector>

namespace hivdyn {

// 1-based ranks; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n - 2 df
  std::size_t n = 0;
};

CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

// Two-sided p for a Student t statistic.
double student_t_two_sided_p(double t, double df);

struct RankSumResult {
  double statistic = 0.0;  // rank sum of group a
  double expected = 0.0;   // null expectation of the statistic
  double p_value = 1.0;    // two-sided
  bool exact = false;
};

// Pooled sizes at or below this use the exact permutation distribution.
inline constexpr std::size_t kExactRankSumLimit = 12;

RankSumResult wilcoxon_rank_sum(std::span<const double> group_a, std::span<const double> group_b);

}  // namespace hivdyn
