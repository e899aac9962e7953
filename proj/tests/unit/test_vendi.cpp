#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "../oracles.hpp"
#include "divbench/synth.hpp"
#include "divbench/vendi.hpp"
#include "support.hpp"

using namespace divbench;
using doctest::Approx;

namespace {

// 1.754765...: exp of the entropy of (0.75, 0.25), evaluated by hand.
const double kThreeOne = std::exp(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25)));

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) x(r, c) = g(rng);
  }
  return x;
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int d) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, d, d)).householderQ();
}

}  // namespace

TEST_CASE("cosine kernel closed forms") {
  Eigen::MatrixXd same(2, 3);
  same << 1, 0, 0, 1, 0, 0;
  CHECK(cosine_kernel(same).values() == Eigen::MatrixXd::Ones(2, 2));

  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(2, 2);
  CHECK(cosine_kernel(e).values() == Eigen::MatrixXd::Identity(2, 2));

  Eigen::MatrixXd tilted(2, 2);
  tilted << 1, 0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CHECK(cosine_kernel(tilted).values()(0, 1) == Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

  Eigen::MatrixXd scaled(2, 2);
  scaled << 3, 0, 0, 0.25;
  CHECK(cosine_kernel(scaled).values() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("zero rows and malformed kernels are rejected") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
  x.row(1).setZero();
  CHECK_THROWS_CODE(cosine_kernel(x), ErrorCode::ZeroNormRow);

  Eigen::MatrixXd k(2, 2);
  k << 1, 0.5, 0.4, 1;
  CHECK_THROWS_CODE(KernelMatrix{k}, ErrorCode::InvalidKernel);
  k << 0.9, 0.5, 0.5, 1;
  CHECK_THROWS_CODE(KernelMatrix{k}, ErrorCode::InvalidKernel);
}

TEST_CASE("spectrum closed forms") {
  auto eig = [](Eigen::MatrixXd k) { return spectrum(KernelMatrix(std::move(k))).eigenvalues; };
  const auto ones = eig(Eigen::MatrixXd::Ones(2, 2));
  CHECK(ones[0] == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ones[1]) < 1e-12);

  const auto id = eig(Eigen::MatrixXd::Identity(2, 2));
  CHECK(id[0] == Approx(0.5).epsilon(1e-12));
  CHECK(id[1] == Approx(0.5).epsilon(1e-12));

  Eigen::MatrixXd half(2, 2);
  half << 1, 0.5, 0.5, 1;
  const auto h = eig(half);
  CHECK(h[0] == Approx(0.75).epsilon(1e-12));
  CHECK(h[1] == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("spectrum rejects clearly indefinite kernels and clips jitter") {
  Eigen::MatrixXd bad(3, 3);
  bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  CHECK_THROWS_CODE(spectrum(KernelMatrix(bad)), ErrorCode::NotPSD);

  Eigen::MatrixXd rank_one = Eigen::MatrixXd::Ones(4, 4);
  const auto s = spectrum(KernelMatrix(rank_one));
  for (double v : s.eigenvalues) CHECK(v >= 0.0);
  CHECK(std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0) == Approx(1.0).epsilon(1e-12));
  CHECK(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
}

TEST_CASE("vendi score of spectra") {
  CHECK(vendi_score(Spectrum{{1.0, 0.0, 0.0, 0.0}, {false, false, false, false}}) == 1.0);
  CHECK(vendi_score(Spectrum{std::vector<double>(5, 0.2), std::vector<bool>(5, false)}) ==
        Approx(5.0).epsilon(1e-12));
  CHECK(vendi_score(Spectrum{{0.75, 0.25}, {false, false}}) == Approx(1.754765).epsilon(1e-6));
}

TEST_CASE("vendi score of sets") {
  Eigen::MatrixXd identical = Eigen::MatrixXd::Zero(8, 4);
  identical.col(2).setOnes();
  CHECK(std::abs(vendi_of_matrix(identical) - 1.0) < 1e-9);

  CHECK(std::abs(vendi_of_matrix(Eigen::MatrixXd::Identity(8, 8)) - 8.0) < 1e-9);

  Eigen::MatrixXd three_one = Eigen::MatrixXd::Zero(4, 2);
  three_one.col(0).head(3).setOnes();
  three_one(3, 1) = 1.0;
  CHECK(std::abs(vendi_of_matrix(three_one) - kThreeOne) < 1e-9);
  CHECK(std::abs(kThreeOne - 1.754765) < 1e-6);
}

TEST_CASE("synthetic cluster sets hit their closed forms") {
  const ConceptAttribute pair("c", "a");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(std::abs(vendi_of_set(generate_embedding_set({ModelId{"m"}, 1, 0.0, 16, seed}, pair, 0, 8)).value -
                   1.0) < 1e-9);
    CHECK(std::abs(vendi_of_set(generate_embedding_set({ModelId{"m"}, 8, 0.0, 16, seed}, pair, 0, 8)).value -
                   8.0) < 1e-9);
    CHECK(std::abs(vendi_of_set(generate_embedding_set({ModelId{"m"}, 2, 0.0, 16, seed}, pair, 0, 4)).value -
                   2.0) < 1e-9);
  }
}

TEST_CASE("eigen path agrees with the Jacobi SVD oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 24);
    const int d = 1 + static_cast<int>(rng() % 40);
    const auto x = random_matrix(rng, n, d);
    CHECK(std::abs(vendi_of_matrix(x) - oracle::vendi_via_svd(x)) < 1e-8);
  }
}

TEST_CASE("bounds and invariances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    const int d = 2 + static_cast<int>(rng() % 10);
    const auto x = random_matrix(rng, n, d);
    const double vs = vendi_of_matrix(x);
    CHECK(vs >= 1.0 - 1e-12);
    CHECK(vs <= n + 1e-9);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd permuted(n, d);
    for (int r = 0; r < n; ++r) permuted.row(r) = x.row(perm[static_cast<std::size_t>(r)]);
    CHECK(std::abs(vendi_of_matrix(permuted) - vs) < 1e-10);

    CHECK(std::abs(vendi_of_matrix(x * random_orthogonal(rng, d)) - vs) < 1e-8);

    Eigen::MatrixXd doubled(2 * n, d);
    doubled << x, x;
    CHECK(std::abs(vendi_of_matrix(doubled) - vs) < 1e-8);
  }
}

TEST_CASE("median score increases with cluster count") {
  const ConceptAttribute pair("c", "a");
  std::vector<double> medians;
  for (int k : {1, 2, 4, 8}) {
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      values.push_back(vendi_of_set(generate_embedding_set({ModelId{"m"}, k, 0.05, 16, seed}, pair, 0, 8)).value);
    }
    std::nth_element(values.begin(), values.begin() + 50, values.end());
    medians.push_back(values[50]);
  }
  CHECK(std::is_sorted(medians.begin(), medians.end(), std::less_equal<>()));
  CHECK(medians.front() < medians.back());
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] > medians[i - 1]);
}

TEST_CASE("unique token diversity") {
  CHECK(unique_token_diversity(std::vector<std::string>{"oak", "oak", "oak"}) == 1);
  CHECK(unique_token_diversity(std::vector<std::string>{"oak", "pine", "elm"}) == 3);
  CHECK(unique_token_diversity(std::vector<std::string>{"Oak", "oak "}, true) == 1);
  CHECK(unique_token_diversity(std::vector<std::string>{"Oak", "oak "}, false) == 2);
  CHECK_THROWS_CODE(unique_token_diversity(std::vector<std::string>{}), ErrorCode::BadInput);
}

TEST_CASE("score record JSON round trip") {
  ScoreRecord r;
  r.model = "m";
  r.pair = ConceptAttribute("apple", "color");
  r.replicate = 4;
  r.embedder = "clip";
  r.conditioning = ConditioningSpec{ConditioningKind::ConceptAndAttribute, std::string("apple color")};
  r.score = 3.25;
  const auto back = score_record_from_json(to_json(r));
  CHECK(back.model == r.model);
  CHECK(back.pair == r.pair);
  CHECK(back.replicate == 4);
  CHECK(back.embedder == "clip");
  CHECK(back.conditioning == r.conditioning);
  CHECK(back.score == 3.25);
}
