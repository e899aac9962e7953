#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace divbench {

enum class TestMethod { BinomialExact, WilcoxonExact, WilcoxonNormal };

std::string_view to_string(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::BinomialExact;
  int n_effective = 0;
};

enum class Significance { Greater, Less, NotSignificant };

std::string_view to_string(Significance s);
/// ">", "<" or "=".
std::string_view to_symbol(Significance s);

struct SignificanceResult {
  Significance sign = Significance::NotSignificant;
  double p_value = 1.0;
  double alpha_level = 0.05;
};

inline constexpr int kExactHalfLimit = 1000;

/// Exact two-sided binomial test: sums the probability of every outcome at
/// most as likely as `k` (relative slack 1e-12 on the comparison). For
/// p0 = 0.5 and n <= kExactHalfLimit the sum runs over integers.
TestResult binomial_two_sided(int k, int n, double p0 = 0.5);

inline constexpr int kWilcoxonExactLimit = 20;

/// Wilcoxon signed-rank test. Exact zeros are dropped, tied |d| share
/// average ranks. Exact null distribution up to kWilcoxonExactLimit nonzero
/// differences, normal approximation (continuity and tie corrected) above.
/// The statistic is W+, the rank sum of the positive differences.
TestResult wilcoxon_signed_rank(std::span<const double> diffs);

/// `direction` > 0 when the row side won, < 0 when it lost, 0 when neither.
SignificanceResult significance_from_test(const TestResult& test, int direction,
                                          double alpha_level = 0.05);

/// Mann-Whitney AUC: P(pos > neg) + 0.5 P(pos == neg), via average ranks.
double roc_auc(std::span<const std::pair<double, bool>> scored);

/// Average (1-based) ranks of `values`, ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace divbench
