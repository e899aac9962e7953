#include "divbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "divbench/errors.hpp"

namespace divbench {

std::string_view to_string(TestMethod method) {
  switch (method) {
    case TestMethod::BinomialExact: return "BinomialExact";
    case TestMethod::WilcoxonExact: return "WilcoxonExact";
    case TestMethod::WilcoxonNormal: return "WilcoxonNormal";
  }
  return "BinomialExact";
}

std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::Greater: return "Greater";
    case Significance::Less: return "Less";
    case Significance::NotSignificant: return "NotSignificant";
  }
  return "NotSignificant";
}

std::string_view to_symbol(Significance s) {
  switch (s) {
    case Significance::Greater: return ">";
    case Significance::Less: return "<";
    case Significance::NotSignificant: return "=";
  }
  return "=";
}

namespace {

double log_binomial_pmf(int i, int n, double log_p, double log_q) {
  return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * log_p +
         (n - i) * log_q;
}

}  // namespace

TestResult binomial_two_sided(int k, int n, double p0) {
  if (n < 1 || k < 0 || k > n) {
    throw Error(ErrorCode::BadInput, "binomial test needs 0 <= k <= n, n >= 1 (k=" +
                                         std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error(ErrorCode::BadInput, "p0 must lie in (0, 1)");

  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double threshold = log_binomial_pmf(k, n, log_p, log_q) + std::log1p(1e-12);

  TestResult result;
  result.statistic = k;
  result.method = TestMethod::BinomialExact;
  result.n_effective = n;

  if (p0 == 0.5 && n <= kExactHalfLimit) {
    // Every pmf is C(n,i)/2^n. Distinct coefficients in a row differ by far
    // more than the 1e-12 slack, so the comparison is exact on integers and
    // the p-value is the rounded quotient of an exact integer sum.
    using boost::multiprecision::cpp_int;
    std::vector<cpp_int> row(static_cast<std::size_t>(n) + 1);
    row[0] = 1;
    for (int i = 1; i <= n; ++i) row[i] = row[i - 1] * (n - i + 1) / i;
    cpp_int total = 0;
    for (const auto& c : row) {
      if (c <= row[k]) total += c;
    }
    result.p_value = std::min(1.0, std::ldexp(total.convert_to<double>(), -n));
    return result;
  }

  double p = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double lp = log_binomial_pmf(i, n, log_p, log_q);
    if (lp <= threshold) p += std::exp(lp);
  }
  result.p_value = std::clamp(p, 0.0, 1.0);
  return result;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

TestResult wilcoxon_signed_rank(std::span<const double> diffs) {
  std::vector<double> nonzero;
  for (double d : diffs) {
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFinite, "difference is not finite");
    if (d != 0.0) nonzero.push_back(d);
  }
  const int m = static_cast<int>(nonzero.size());
  if (m == 0) throw Error(ErrorCode::AllZero, "all differences are zero");

  std::vector<double> magnitudes(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), magnitudes.begin(),
                 [](double d) { return std::abs(d); });
  const auto ranks = average_ranks(magnitudes);

  double w_plus = 0.0;
  for (int i = 0; i < m; ++i) {
    if (nonzero[i] > 0) w_plus += ranks[i];
  }

  TestResult result;
  result.statistic = w_plus;
  result.n_effective = m;

  if (m <= kWilcoxonExactLimit) {
    // Null distribution of 2*W+ over all 2^m sign assignments; doubled
    // average ranks are integers.
    std::vector<int> doubled(m);
    int max_sum = 0;
    for (int i = 0; i < m; ++i) {
      doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
      max_sum += doubled[i];
    }
    std::vector<std::uint64_t> counts(max_sum + 1, 0);
    counts[0] = 1;
    int reach = 0;
    for (int r : doubled) {
      for (int s = reach; s >= 0; --s) {
        if (counts[s]) counts[s + r] += counts[s];
      }
      reach += r;
    }
    const int observed = static_cast<int>(std::lround(2.0 * w_plus));
    std::uint64_t upper = 0, lower = 0;
    for (int s = 0; s <= max_sum; ++s) {
      if (s >= observed) upper += counts[s];
      if (s <= observed) lower += counts[s];
    }
    result.method = TestMethod::WilcoxonExact;
    result.p_value = std::min(1.0, std::ldexp(static_cast<double>(2 * std::min(upper, lower)), -m));
    return result;
  }

  // Tie-corrected variance: subtract sum(t^3 - t)/48 over tie groups.
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double md = m;
  const double mean = md * (md + 1.0) / 4.0;
  const double variance = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, (std::abs(w_plus - mean) - 0.5) / std::sqrt(variance));
  result.method = TestMethod::WilcoxonNormal;
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

SignificanceResult significance_from_test(const TestResult& test, int direction,
                                          double alpha_level) {
  SignificanceResult s;
  s.p_value = test.p_value;
  s.alpha_level = alpha_level;
  if (test.p_value < alpha_level && direction != 0) {
    s.sign = direction > 0 ? Significance::Greater : Significance::Less;
  }
  return s;
}

double roc_auc(std::span<const std::pair<double, bool>> scored) {
  std::vector<double> scores;
  scores.reserve(scored.size());
  std::size_t n_pos = 0;
  for (const auto& [score, label] : scored) {
    if (!std::isfinite(score)) throw Error(ErrorCode::NonFinite, "AUC score is not finite");
    scores.push_back(score);
    if (label) ++n_pos;
  }
  const std::size_t n_neg = scored.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::OneClassOnly, "AUC needs at least one positive and one negative");
  }
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second) rank_sum += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace divbench
