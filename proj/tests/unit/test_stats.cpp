#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "divbench/stats.hpp"
#include "support.hpp"

using namespace divbench;
using doctest::Approx;

namespace {

TestResult wilcoxon(std::vector<double> d) { return wilcoxon_signed_rank(d); }

double auc(std::vector<std::pair<double, bool>> s) { return roc_auc(s); }

}  // namespace

TEST_CASE("binomial examples") {
  CHECK(binomial_two_sided(10, 10).p_value == 2.0 / 1024.0);
  CHECK(binomial_two_sided(5, 10).p_value == 1.0);
  CHECK(binomial_two_sided(15, 20).p_value == 2.0 * 21700.0 / 1048576.0);
  CHECK(binomial_two_sided(15, 20).p_value == Approx(0.0414).epsilon(1e-3));
  CHECK(binomial_two_sided(43, 86).p_value == 1.0);
}

TEST_CASE("binomial matches direct pmf summation bit for bit") {
  for (int n = 1; n <= 40; ++n) {
    for (int k = 0; k <= n; ++k) {
      CHECK_MESSAGE(binomial_two_sided(k, n).p_value == oracle::binomial_p_half(k, n), "k=" << k << " n=" << n);
    }
  }
}

TEST_CASE("binomial symmetry and monotonicity") {
  for (int n = 1; n <= 60; ++n) {
    double previous = 2.0;
    for (int k = (n + 1) / 2; k <= n; ++k) {
      const double p = binomial_two_sided(k, n).p_value;
      CHECK(p == binomial_two_sided(n - k, n).p_value);
      CHECK(p <= previous);
      previous = p;
    }
  }
}

TEST_CASE("binomial with an unequal null") {
  // P(X=0 | n=5, p=0.2) = 0.32768; outcomes at most as likely are {0, 2, 3, 4, 5}.
  const double p = binomial_two_sided(0, 5, 0.2).p_value;
  const double p1 = 5 * 0.2 * std::pow(0.8, 4);
  CHECK(p == Approx(1.0 - p1).epsilon(1e-12));
  CHECK_THROWS_CODE(binomial_two_sided(3, 2), ErrorCode::BadInput);
  CHECK_THROWS_CODE(binomial_two_sided(1, 2, 1.0), ErrorCode::BadInput);
}

TEST_CASE("wilcoxon examples") {
  auto r = wilcoxon({1, 2, 3});
  CHECK(r.statistic == 6.0);
  CHECK(r.p_value == 0.25);
  CHECK(r.method == TestMethod::WilcoxonExact);

  r = wilcoxon({1, 2, 3, -4});
  CHECK(r.statistic == 6.0);
  CHECK(r.p_value == 0.875);

  r = wilcoxon({0, 0, 5});
  CHECK(r.n_effective == 1);
  CHECK(r.statistic == 1.0);
  CHECK(r.p_value == 1.0);

  CHECK_THROWS_CODE(wilcoxon({0, 0}), ErrorCode::AllZero);
  CHECK_THROWS_CODE(wilcoxon({1, NAN}), ErrorCode::NonFinite);
}

TEST_CASE("exact wilcoxon matches 2^m enumeration, ties included") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 12);
    std::vector<double> d;
    const bool coarse = trial % 2 == 0;  // coarse values force tied |d|
    for (int i = 0; i < m; ++i) {
      const double mag = coarse ? static_cast<double>(1 + rng() % 4) : std::ldexp(static_cast<double>(rng() % 100000 + 1), -10);
      const int sign_draw = static_cast<int>(rng() % 5);
      d.push_back(sign_draw == 0 ? 0.0 : (sign_draw <= 2 ? mag : -mag));
    }
    const auto expected = oracle::wilcoxon_enumerate(d);
    if (expected.m == 0) continue;
    const auto got = wilcoxon_signed_rank(d);
    CHECK(got.statistic == expected.w_plus);
    CHECK(got.p_value == expected.p_value);
  }
}

TEST_CASE("normal approximation above the exact limit") {
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 3 == 0 ? -i : i);
  const auto r = wilcoxon_signed_rank(d);
  CHECK(r.method == TestMethod::WilcoxonNormal);
  CHECK(r.n_effective == 30);
  // W+ = 465 - 165 = 300, mean 232.5, sd sqrt(30*31*61/24) with continuity 0.5
  const double z = (300 - 232.5 - 0.5) / std::sqrt(30.0 * 31 * 61 / 24);
  CHECK(r.p_value == Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-12));

  std::vector<double> exact_edge(kWilcoxonExactLimit, 1.0);
  CHECK(wilcoxon_signed_rank(exact_edge).method == TestMethod::WilcoxonExact);
  CHECK(wilcoxon_signed_rank(exact_edge).p_value == std::ldexp(2.0, -kWilcoxonExactLimit));
}

TEST_CASE("significance decisions") {
  CHECK(significance_from_test(TestResult{0, 0.001, TestMethod::BinomialExact, 10}, +1).sign == Significance::Greater);
  CHECK(significance_from_test(TestResult{0, 0.20, TestMethod::BinomialExact, 10}, +1).sign ==
        Significance::NotSignificant);
  CHECK(significance_from_test(TestResult{0, 0.049, TestMethod::BinomialExact, 10}, -1).sign == Significance::Less);
  CHECK(significance_from_test(TestResult{0, 0.05, TestMethod::BinomialExact, 10}, -1).sign ==
        Significance::NotSignificant);
  CHECK(significance_from_test(TestResult{0, 0.001, TestMethod::BinomialExact, 10}, 0).sign ==
        Significance::NotSignificant);
  CHECK(to_symbol(Significance::Greater) == ">");
}

TEST_CASE("roc auc examples") {
  CHECK(auc({{0.8, true}, {0.9, true}, {0.1, false}, {0.2, false}}) == 1.0);
  CHECK(auc({{0.5, true}, {0.5, false}}) == 0.5);
  CHECK(auc({{0.3, true}, {0.7, true}, {0.5, false}}) == 0.5);
  CHECK_THROWS_CODE(auc({{0.3, true}, {0.7, true}}), ErrorCode::OneClassOnly);
}

TEST_CASE("roc auc matches pair counting and ignores monotone transforms") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, bool>> s;
    const int n = 2 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) s.emplace_back(static_cast<double>(rng() % 10), i % 2 == 0);
    const double a = roc_auc(s);
    CHECK(a == Approx(oracle::auc_pairs(s)).epsilon(1e-12));
    auto t = s;
    for (auto& [v, l] : t) v = std::exp(0.3 * v) - 4.0;
    CHECK(roc_auc(t) == Approx(a).epsilon(1e-12));
  }
}
