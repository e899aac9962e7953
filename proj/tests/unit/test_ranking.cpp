#include <doctest.h>

#include <algorithm>
#include <random>

#include "../oracles.hpp"
#include "divbench/ranking.hpp"
#include "divbench/synth.hpp"
#include "support.hpp"

using namespace divbench;

namespace {

constexpr auto L = Verdict::LeftMoreDiverse;
constexpr auto R = Verdict::RightMoreDiverse;
constexpr auto E = Verdict::EquallyDiverse;

AggregatedComparison comparison(int concept_index, const std::string& left, const std::string& right, Verdict v,
                                int replicate = 0) {
  AggregatedComparison c;
  c.pair = ConceptAttribute("concept" + std::to_string(concept_index), "attr");
  c.model_left = ModelId{left};
  c.model_right = ModelId{right};
  c.replicate = c.replicate_right = replicate;
  c.verdict = v;
  c.n_ratings = 5;
  return c;
}

// A wins `wins` concepts, B wins `losses`, the rest of `total` are equal.
std::vector<AggregatedComparison> contest(int wins, int losses, int total) {
  std::vector<AggregatedComparison> out;
  for (int i = 0; i < total; ++i) out.push_back(comparison(i, "A", "B", i < wins ? L : (i < wins + losses ? R : E)));
  return out;
}

ScoreRecord score(const std::string& model, int concept_index, int replicate, double value,
                  const std::string& embedder = "emb") {
  ScoreRecord s;
  s.model = model;
  s.pair = ConceptAttribute("concept" + std::to_string(concept_index), "attr");
  s.replicate = replicate;
  s.embedder = embedder;
  s.score = value;
  return s;
}

void check_antisymmetric(const ComparisonMatrix& m) {
  for (std::size_t r = 0; r < m.size(); ++r) {
    CHECK_FALSE(m.cell(r, r).has_value());
    for (std::size_t c = 0; c < m.size(); ++c) {
      if (r == c) continue;
      const auto& a = *m.cell(r, c);
      const auto& b = *m.cell(c, r);
      CHECK(a.p_value == b.p_value);
      CHECK(a.wins_row == b.wins_col);
      CHECK(a.ties == b.ties);
      if (a.sign == Significance::Greater) CHECK(b.sign == Significance::Less);
      if (a.sign == Significance::NotSignificant) CHECK(b.sign == Significance::NotSignificant);
    }
  }
}

}  // namespace

TEST_CASE("human ranking examples") {
  auto m = rank_human(contest(10, 0, 10));
  auto cell = *m.cell(*m.index_of("A"), *m.index_of("B"));
  CHECK(cell.sign == Significance::Greater);
  CHECK(cell.p_value == oracle::binomial_p_half(10, 10));
  CHECK(cell.wins_row == 10);
  CHECK(m.cell(*m.index_of("B"), *m.index_of("A"))->sign == Significance::Less);

  m = rank_human(contest(5, 5, 10));
  CHECK(m.cell(0, 1)->sign == Significance::NotSignificant);
  CHECK(m.cell(0, 1)->p_value == 1.0);

  m = rank_human(contest(43, 43, 86));
  CHECK(m.cell(0, 1)->sign == Significance::NotSignificant);

  // equal concepts shrink n instead of counting as half wins
  m = rank_human(contest(6, 0, 10));
  CHECK(m.cell(0, 1)->n_concepts == 10);
  CHECK(m.cell(0, 1)->wins_row == 6);
  CHECK(m.cell(0, 1)->ties == 4);
  CHECK(m.cell(0, 1)->p_value == oracle::binomial_p_half(6, 6));

  m = rank_human(contest(0, 0, 4));
  CHECK(m.cell(0, 1)->flag == "NoDecisiveConcepts");
  CHECK(m.cell(0, 1)->sign == Significance::NotSignificant);
}

TEST_CASE("human ranking ignores concept and listing order") {
  const std::vector<std::string> best_first = {"m3", "m1", "m0", "m2"};
  const auto pairs = synthetic_pairs(20);
  AnnotationSynthSpec spec;
  spec.fidelity = 0.8;
  spec.seed = 4;
  const auto records = generate_annotations(planted_tournament(best_first, pairs, 3), spec);
  auto aggregated = aggregate_tasks(records);
  const auto base = rank_human(aggregated);
  check_antisymmetric(base);

  std::mt19937 rng(1);
  std::shuffle(aggregated.begin(), aggregated.end(), rng);
  CHECK(rank_human(aggregated) == base);

  for (auto& a : aggregated) {
    std::swap(a.model_left, a.model_right);
    std::swap(a.replicate, a.replicate_right);
    a.verdict = mirror(a.verdict);
  }
  CHECK(rank_human(aggregated) == base);
}

TEST_CASE("auto ranking examples") {
  std::vector<ScoreRecord> scores;
  for (int c = 0; c < 12; ++c) {
    for (int rep = 0; rep < 3; ++rep) {
      const double base = c * 0.37 + rep * 0.05;
      scores.push_back(score("A", c, rep, base + 1.0));
      scores.push_back(score("B", c, rep, base));
      scores.push_back(score("C", c, rep, base));
    }
  }
  const auto m = rank_auto(scores);
  check_antisymmetric(m);
  const auto a = *m.index_of("A"), b = *m.index_of("B"), c = *m.index_of("C");
  CHECK(m.cell(a, b)->sign == Significance::Greater);
  CHECK(m.cell(a, b)->p_value == std::ldexp(2.0, -12));
  CHECK(m.cell(a, b)->wins_row == 12);
  CHECK(m.cell(b, c)->sign == Significance::NotSignificant);
  CHECK(m.cell(b, c)->flag == "AllZero");
  CHECK(m.method() == "WilcoxonSignedRank");
}

TEST_CASE("auto ranking direction follows the median difference") {
  // One huge negative outlier cannot flip a consistent positive majority.
  std::vector<ScoreRecord> scores;
  for (int c = 0; c < 15; ++c) {
    scores.push_back(score("A", c, 0, c == 0 ? -100.0 : 2.0));
    scores.push_back(score("B", c, 0, 1.0));
  }
  const auto m = rank_auto(scores);
  CHECK(m.cell(*m.index_of("A"), *m.index_of("B"))->sign == Significance::Greater);
}

TEST_CASE("auto ranking input checks") {
  std::vector<ScoreRecord> scores = {score("A", 0, 0, 1.0), score("B", 0, 0, 2.0), score("A", 1, 0, 1.0)};
  CHECK_THROWS_CODE(rank_auto(scores), ErrorCode::GridMismatch);
  scores = {score("A", 0, 0, 1.0), score("B", 0, 0, 2.0, "other")};
  CHECK_THROWS_CODE(rank_auto(scores), ErrorCode::SchemaError);
}

TEST_CASE("planted cluster models rank by cluster count") {
  const auto pairs = synthetic_pairs(30);
  std::vector<ScoreRecord> scores;
  for (int k : {2, 8}) {
    const SynthModelSpec spec{ModelId{"k" + std::to_string(k)}, k, 0.05, 16, 3};
    for (const auto& p : pairs) {
      for (int rep = 0; rep < 3; ++rep) scores.push_back(to_score_record(vendi_of_set(generate_embedding_set(spec, p, rep, 8))));
    }
  }
  const auto m = rank_auto(scores);
  CHECK(m.cell(*m.index_of("k8"), *m.index_of("k2"))->sign == Significance::Greater);
}

TEST_CASE("win rate examples") {
  auto w = win_rate_matrix({score("A", 0, 0, 2), score("B", 0, 0, 1), score("A", 1, 0, 3), score("B", 1, 0, 1)});
  CHECK(w.rates[0][1] == 0.5);
  CHECK(w.rates[1][0] == -0.5);

  w = win_rate_matrix({score("A", 0, 0, 1), score("B", 0, 0, 1)});
  CHECK(w.rates[0][1] == 0.0);

  w = win_rate_matrix({score("A", 0, 0, 2), score("B", 0, 0, 1), score("A", 1, 0, 1), score("B", 1, 0, 2)});
  CHECK(w.rates[0][1] == 0.0);
}

TEST_CASE("win rates are exactly antisymmetric") {
  std::mt19937_64 rng(12);
  std::vector<ScoreRecord> scores;
  for (int c = 0; c < 7; ++c) {
    for (int rep = 0; rep < 3; ++rep) {
      for (const char* m : {"A", "B", "C", "D"}) scores.push_back(score(m, c, rep, static_cast<double>(rng() % 4)));
    }
  }
  const auto w = win_rate_matrix(scores);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(w.rates[i][i] == 0.0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(w.rates[i][j] + w.rates[j][i] == 0.0);
  }
}

TEST_CASE("sufficiency ablation") {
  const std::vector<std::string> best_first = {"m0", "m1", "m2"};
  const auto pairs = synthetic_pairs(86);
  AnnotationSynthSpec spec;
  spec.fidelity = 0.9;
  spec.seed = 2;
  const auto aggregated = aggregate_tasks(generate_annotations(planted_tournament(best_first, pairs, 1), spec));

  SUBCASE("full size reproduces the full ranking") {
    const auto report = sufficiency_ablation(aggregated, {86}, 1);
    CHECK(report.steps.at(0).matrix == rank_human(aggregated));
    CHECK(report.full == rank_human(aggregated));
  }
  SUBCASE("descending sizes are nested and deterministic") {
    const auto a = sufficiency_ablation(aggregated, {74, 64, 54, 24}, 7);
    const auto b = sufficiency_ablation(aggregated, {74, 64, 54, 24}, 7);
    CHECK(to_json(a).dump() == to_json(b).dump());
    REQUIRE(a.steps.size() == 4);
    for (std::size_t i = 1; i < a.steps.size(); ++i) {
      const auto& big = a.steps[i - 1].concepts;
      const auto& small = a.steps[i].concepts;
      CHECK(small.size() < big.size());
      CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
    CHECK(to_json(sufficiency_ablation(aggregated, {74, 64, 54, 24}, 8)).dump() != to_json(a).dump());
  }
  SUBCASE("a single concept cannot reach significance") {
    const auto report = sufficiency_ablation(aggregated, {1}, 3);
    const auto& m = report.steps[0].matrix;
    for (std::size_t r = 0; r < m.size(); ++r) {
      for (std::size_t c = 0; c < m.size(); ++c) {
        if (r != c) CHECK(m.cell(r, c)->sign == Significance::NotSignificant);
      }
    }
  }
  CHECK_THROWS_CODE(sufficiency_ablation(aggregated, {87}, 1), ErrorCode::SizeTooLarge);
  CHECK_THROWS_CODE(sufficiency_ablation(aggregated, {0}, 1), ErrorCode::BadInput);
}

TEST_CASE("matrix JSON and grid") {
  const auto m = rank_human(contest(10, 0, 10));
  const auto j = to_json(m);
  CHECK(j["models"] == Json::array({"A", "B"}));
  CHECK(j["cells"].size() == 2);
  CHECK(j["cells"][0]["sign"] == ">");
  const auto grid = render_grid(m);
  CHECK(grid.find('x') != std::string::npos);
  CHECK(grid.find('>') != std::string::npos);
  CHECK(grid.find('<') != std::string::npos);
}
