#include <doctest.h>

#include "divbench/metric_eval.hpp"
#include "support.hpp"

using namespace divbench;

namespace {

constexpr auto L = Verdict::LeftMoreDiverse;
constexpr auto R = Verdict::RightMoreDiverse;
constexpr auto E = Verdict::EquallyDiverse;
constexpr auto U = Verdict::UnableToAnswer;

ConceptAttribute concept_n(int i) { return ConceptAttribute("concept" + std::to_string(i), "attr"); }

AggregatedComparison human(int i, Verdict v, std::optional<int> gap = std::nullopt) {
  AggregatedComparison c;
  c.pair = concept_n(i);
  c.model_left = ModelId{"A"};
  c.model_right = ModelId{"B"};
  c.verdict = v;
  c.n_ratings = 5;
  c.modal_count_gap = gap;
  return c;
}

void add_scores(std::vector<ScoreRecord>& out, int i, double left, double right) {
  for (auto [model, value] : {std::pair{"A", left}, std::pair{"B", right}}) {
    ScoreRecord s;
    s.model = model;
    s.pair = concept_n(i);
    s.embedder = "clip";
    s.score = value;
    out.push_back(s);
  }
}

RatingRecord golden_record(const std::string& rater, const std::string& left_tag, const std::string& right_tag,
                           Verdict v, std::optional<int> cl = std::nullopt, std::optional<int> cr = std::nullopt) {
  RatingRecord r;
  r.task_id = "g-" + left_tag + "-" + right_tag;
  r.study_id = "count_aspect";
  r.pair = ConceptAttribute("apple", "color");
  r.model_left = ModelId{left_tag};
  r.model_right = ModelId{right_tag};
  r.set_left = SetRef{r.model_left, r.pair, 0, {"a", "b", "c", "d", "e", "f", "g", "h"}};
  r.set_right = SetRef{r.model_right, r.pair, 0, {"a", "b", "c", "d", "e", "f", "g", "h"}};
  r.rater_id = rater;
  r.verdict = v;
  r.count_left = cl;
  r.count_right = cr;
  return r;
}

}  // namespace

TEST_CASE("accuracy examples") {
  std::vector<ScoreRecord> s;
  add_scores(s, 0, 2.0, 1.0);
  add_scores(s, 1, 1.5, 1.8);
  auto r = autorater_accuracy({human(0, L), human(1, R)}, s);
  CHECK(r.accuracy == 1.0);
  CHECK(r.n_pairs == 2);

  s.clear();
  add_scores(s, 0, 1.0, 1.0);
  r = autorater_accuracy({human(0, L)}, s);
  CHECK(r.accuracy == 0.0);
  CHECK(r.n_score_ties == 1);

  s.clear();
  add_scores(s, 0, 2, 1);
  add_scores(s, 1, 2, 1);
  add_scores(s, 2, 9, 1);
  r = autorater_accuracy({human(0, L), human(1, R), human(2, E)}, s);
  CHECK(r.accuracy == 0.5);
  CHECK(r.n_pairs == 2);
  CHECK(r.n_excluded_equal == 1);
}

TEST_CASE("gap stratum keeps strictly larger gaps, zero means all") {
  std::vector<ScoreRecord> s;
  std::vector<AggregatedComparison> h;
  for (int i = 0; i < 8; ++i) {
    add_scores(s, i, i % 2 ? 1.0 : 2.0, 1.5);
    h.push_back(human(i, L, i));
  }
  h.push_back(human(8, U, 7));
  add_scores(s, 8, 1, 2);

  const auto all = autorater_accuracy(h, s);
  CHECK(all.n_pairs == 8);
  CHECK(all.accuracy == 0.5);
  CHECK(all.n_excluded_unable == 1);

  const auto zero = autorater_accuracy(h, s, 0);
  CHECK(zero.n_pairs == all.n_pairs);
  CHECK(zero.accuracy == all.accuracy);
  CHECK_FALSE(zero.min_gap.has_value());

  const auto gap = autorater_accuracy(h, s, 4);
  CHECK(gap.n_pairs == 3);  // gaps 5, 6, 7
  CHECK(gap.n_excluded_gap == 5);
  CHECK(gap.min_gap == 4);
  CHECK(to_json(gap)["stratum"] == "GapGreaterThan(4)");
}

TEST_CASE("join failures and mixed autoraters") {
  std::vector<ScoreRecord> s;
  add_scores(s, 5, 1, 2);
  CHECK_THROWS_CODE(autorater_accuracy({human(0, L)}, s), ErrorCode::JoinFailure);
  add_scores(s, 0, 1, 2);
  s[s.size() - 1].embedder = s[s.size() - 2].embedder = "dino";
  CHECK_THROWS_CODE(autorater_accuracy({human(0, L)}, s), ErrorCode::SchemaError);
  const auto split = autorater_accuracy_by_rater({human(0, L), human(5, R)}, s);
  CHECK(split.size() == 2);
}

TEST_CASE("equal detection auc") {
  std::vector<ScoreRecord> s;
  std::vector<AggregatedComparison> h;
  int i = 0;
  for (double d : {0.01, 0.02}) add_scores(s, i, 1.0 + d, 1.0), h.push_back(human(i++, E));
  for (double d : {0.9, 1.1}) add_scores(s, i, 1.0, 1.0 + d), h.push_back(human(i++, R));
  CHECK(equal_detection_auc(h, s) == 1.0);

  s.clear();
  h.clear();
  for (int k = 0; k < 4; ++k) add_scores(s, k, 2.0, 1.5), h.push_back(human(k, k < 2 ? E : L));
  CHECK(equal_detection_auc(h, s) == 0.5);

  s.clear();
  h.clear();
  add_scores(s, 0, 1.5, 1.0), h.push_back(human(0, E));
  add_scores(s, 1, 1.4, 1.0), h.push_back(human(1, L));
  add_scores(s, 2, 1.0, 1.6), h.push_back(human(2, R));
  CHECK(equal_detection_auc(h, s) == 0.5);

  // mirroring every comparison leaves |delta| and the labels unchanged
  for (auto& x : h) std::swap(x.model_left, x.model_right), x.verdict = mirror(x.verdict);
  CHECK(equal_detection_auc(h, s) == 0.5);
}

TEST_CASE("golden subsets and expectations") {
  CHECK(golden_subset_from_tag("ii") == GoldenSubset::ConceptVaries);
  CHECK(golden_subset_from_tag("Both_Vary") == GoldenSubset::BothVary);
  CHECK_THROWS_CODE(golden_subset_from_tag("iv"), ErrorCode::UnknownSubsetTag);

  const auto table = default_golden_expectations();
  const ConceptAttribute p("apple", "color");
  using GS = GoldenSubset;
  CHECK(expected_verdict(p, GS::AspectVaries, GS::ConceptVaries, table) == L);
  CHECK(expected_verdict(p, GS::ConceptVaries, GS::AspectVaries, table) == R);
  // the table holds both (iii) > (ii) and (ii) = (iii): orientation decides
  CHECK(expected_verdict(p, GS::BothVary, GS::ConceptVaries, table) == L);
  CHECK(expected_verdict(p, GS::ConceptVaries, GS::BothVary, table) == E);
  CHECK_FALSE(expected_verdict(p, GS::AspectVaries, GS::BothVary, table).has_value());

  auto specific = table;
  specific.push_back({p, GS::ConceptVaries, GS::AspectVaries, GoldenRelation::Equal});
  CHECK(expected_verdict(p, GS::ConceptVaries, GS::AspectVaries, specific) == E);
  CHECK(expected_verdict(ConceptAttribute("pear", "x"), GS::ConceptVaries, GS::AspectVaries, specific) == R);

  CHECK(to_json(golden_expectations_from_json(to_json(specific))) == to_json(specific));
}

TEST_CASE("golden validation") {
  const auto table = default_golden_expectations();
  auto results = golden_validate({golden_record("r0", "i", "ii", L), golden_record("r1", "iii", "ii", L)}, table);
  REQUIRE(results.size() == 1);
  CHECK(results[0].accuracy() == 1.0);
  CHECK(results[0].variant == "count_aspect");
  CHECK(results[0].set_size == 8);

  results = golden_validate({golden_record("r0", "i", "ii", E), golden_record("r1", "i", "ii", L)}, table);
  CHECK(results[0].n_correct == 1);
  CHECK(results[0].n_total == 2);

  const std::vector<GoldenExpectation> all_equal = {
      {std::nullopt, GoldenSubset::AspectVaries, GoldenSubset::ConceptVaries, GoldenRelation::Equal}};
  results = golden_validate({golden_record("r0", "i", "ii", E), golden_record("r1", "ii", "i", E)}, all_equal);
  CHECK(results[0].accuracy() == 1.0);

  results = golden_validate({golden_record("r0", "i", "iii", L)}, table);
  CHECK(results[0].n_unscored == 1);
  CHECK(results[0].n_total == 0);
}

TEST_CASE("golden validation of scores") {
  std::vector<ScoreRecord> s;
  for (auto [tag, value] : {std::pair{"i", 5.0}, std::pair{"ii", 2.0}, std::pair{"iii", 2.0}}) {
    ScoreRecord r;
    r.model = tag;
    r.pair = ConceptAttribute("apple", "color");
    r.embedder = "clip";
    r.score = value;
    s.push_back(r);
  }
  const auto results = golden_validate_scores(s, default_golden_expectations());
  REQUIRE(results.size() == 1);
  CHECK(results[0].n_total == 3);
  CHECK(results[0].n_correct == 2);  // (iii) > (ii) fails on a tie, (ii) = (iii) holds
}

TEST_CASE("count distributions") {
  std::vector<RatingRecord> diverse;
  for (int r = 0; r < 5; ++r) diverse.push_back(golden_record("r" + std::to_string(r), "i", "ii", L, 8, 2));
  auto h = count_distribution(diverse, GoldenLabel::Diverse);
  CHECK(h.mode == 8);

  std::vector<RatingRecord> flat;
  int k = 0;
  for (int c : {1, 1, 1, 2}) flat.push_back(golden_record("r" + std::to_string(k++), "iii", "ii", L, 5, c));
  h = count_distribution(flat, GoldenLabel::NonDiverse);
  CHECK(h.mode == 1);
  CHECK(h.frequency[1] == 3);

  h = count_distribution({}, GoldenLabel::Diverse);
  CHECK_FALSE(h.mode.has_value());
  for (int f : h.frequency) CHECK(f == 0);
}
