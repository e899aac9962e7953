#include "divbench/metric_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "divbench/errors.hpp"
#include "divbench/ranking.hpp"
#include "divbench/stats.hpp"

namespace divbench {

Json to_json(const AccuracyReport& r) {
  Json j;
  j["embedder"] = r.embedder_name;
  j["conditioning"] = to_json(r.conditioning);
  j["stratum"] = r.min_gap ? "GapGreaterThan(" + std::to_string(*r.min_gap) + ")" : "All";
  j["accuracy"] = r.accuracy ? Json(round_sig12(*r.accuracy)) : Json(nullptr);
  j["n_pairs"] = r.n_pairs;
  j["n_correct"] = r.n_correct;
  j["n_excluded_equal"] = r.n_excluded_equal;
  j["n_excluded_unable"] = r.n_excluded_unable;
  j["n_excluded_gap"] = r.n_excluded_gap;
  j["n_score_ties"] = r.n_score_ties;
  return j;
}

namespace {

using ScoreKey = std::tuple<std::string, ConceptAttribute, int>;

struct ScoreIndex {
  std::string embedder;
  ConditioningSpec conditioning;
  std::map<ScoreKey, double> scores;

  std::optional<double> find(const std::string& model, const ConceptAttribute& pair, int rep) const {
    auto it = scores.find(ScoreKey{model, pair, rep});
    if (it == scores.end()) return std::nullopt;
    return it->second;
  }
};

ScoreIndex index_scores(const std::vector<ScoreRecord>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no score records");
  ScoreIndex index;
  index.embedder = scores.front().embedder;
  index.conditioning = scores.front().conditioning;
  const auto key = autorater_key(scores.front());
  for (const auto& s : scores) {
    if (autorater_key(s) != key) {
      throw Error(ErrorCode::SchemaError,
                  "scores mix autoraters '" + key + "' and '" + autorater_key(s) + "'");
    }
    if (!index.scores.emplace(ScoreKey{s.model, s.pair, s.replicate}, s.score).second) {
      throw Error(ErrorCode::SchemaError, "duplicate score for " + s.model + " " + s.pair.key());
    }
  }
  return index;
}

struct Joined {
  const AggregatedComparison* human;
  double left;
  double right;
};

std::vector<Joined> join(const std::vector<AggregatedComparison>& human, const ScoreIndex& index) {
  std::vector<Joined> out;
  for (const auto& h : human) {
    const auto left = index.find(h.model_left.name, h.pair, h.replicate);
    const auto right = index.find(h.model_right.name, h.pair, h.replicate_right);
    if (left && right) out.push_back({&h, *left, *right});
  }
  if (out.empty()) {
    throw Error(ErrorCode::JoinFailure, "no human comparison matches the scores of '" +
                                            index.embedder + "'");
  }
  return out;
}

std::map<std::string, std::vector<ScoreRecord>> split_by_autorater(
    const std::vector<ScoreRecord>& scores) {
  std::map<std::string, std::vector<ScoreRecord>> groups;
  for (const auto& s : scores) groups[autorater_key(s)].push_back(s);
  return groups;
}

}  // namespace

AccuracyReport autorater_accuracy(const std::vector<AggregatedComparison>& human,
                                  const std::vector<ScoreRecord>& scores,
                                  std::optional<int> min_gap) {
  const auto index = index_scores(scores);
  AccuracyReport report;
  report.embedder_name = index.embedder;
  report.conditioning = index.conditioning;
  const bool stratified = min_gap && *min_gap > 0;
  if (stratified) report.min_gap = min_gap;

  for (const auto& j : join(human, index)) {
    const auto verdict = j.human->verdict;
    if (verdict == Verdict::EquallyDiverse) {
      ++report.n_excluded_equal;
      continue;
    }
    if (verdict == Verdict::UnableToAnswer) {
      ++report.n_excluded_unable;
      continue;
    }
    if (stratified && !(j.human->modal_count_gap && *j.human->modal_count_gap > *min_gap)) {
      ++report.n_excluded_gap;
      continue;
    }
    ++report.n_pairs;
    if (j.left == j.right) {
      ++report.n_score_ties;
      continue;
    }
    const bool left_higher = j.left > j.right;
    if (left_higher == (verdict == Verdict::LeftMoreDiverse)) ++report.n_correct;
  }
  if (report.n_pairs > 0) {
    report.accuracy = static_cast<double>(report.n_correct) / report.n_pairs;
  }
  return report;
}

std::vector<AccuracyReport> autorater_accuracy_by_rater(
    const std::vector<AggregatedComparison>& human, const std::vector<ScoreRecord>& scores,
    std::optional<int> min_gap) {
  std::vector<AccuracyReport> out;
  for (const auto& [key, group] : split_by_autorater(scores)) {
    out.push_back(autorater_accuracy(human, group, min_gap));
  }
  return out;
}

double equal_detection_auc(const std::vector<AggregatedComparison>& human,
                           const std::vector<ScoreRecord>& scores) {
  const auto index = index_scores(scores);
  std::vector<std::pair<double, bool>> scored;
  for (const auto& j : join(human, index)) {
    if (j.human->verdict == Verdict::UnableToAnswer) continue;
    scored.emplace_back(std::abs(j.left - j.right), j.human->verdict != Verdict::EquallyDiverse);
  }
  return roc_auc(scored);
}

std::string_view to_string(GoldenSubset s) {
  switch (s) {
    case GoldenSubset::AspectVaries: return "i";
    case GoldenSubset::ConceptVaries: return "ii";
    case GoldenSubset::BothVary: return "iii";
  }
  return "i";
}

GoldenSubset golden_subset_from_tag(std::string_view tag) {
  const auto t = normalize_label(tag);
  if (t == "i" || t == "aspect_varies") return GoldenSubset::AspectVaries;
  if (t == "ii" || t == "concept_varies") return GoldenSubset::ConceptVaries;
  if (t == "iii" || t == "both_vary") return GoldenSubset::BothVary;
  throw Error(ErrorCode::UnknownSubsetTag, "'" + std::string(tag) + "' is not a golden subset tag");
}

std::vector<GoldenExpectation> default_golden_expectations() {
  return {
      {std::nullopt, GoldenSubset::AspectVaries, GoldenSubset::ConceptVaries,
       GoldenRelation::FirstMoreDiverse},
      {std::nullopt, GoldenSubset::BothVary, GoldenSubset::ConceptVaries,
       GoldenRelation::FirstMoreDiverse},
      {std::nullopt, GoldenSubset::ConceptVaries, GoldenSubset::BothVary, GoldenRelation::Equal},
  };
}

std::vector<GoldenExpectation> golden_expectations_from_json(const Json& j) {
  const Json& entries = j.is_object() && j.contains("expectations") ? j["expectations"] : j;
  if (!entries.is_array()) throw Error(ErrorCode::SchemaError, "expectation table must be an array");
  std::vector<GoldenExpectation> table;
  for (const auto& e : entries) {
    GoldenExpectation x;
    if (e.contains("pair") && e["pair"].is_object()) x.pair = pair_from_json(e["pair"]);
    x.subset_a = golden_subset_from_tag(require_string(e, "subset_a"));
    x.subset_b = golden_subset_from_tag(require_string(e, "subset_b"));
    const auto relation = require_string(e, "relation");
    if (relation == "FirstMoreDiverse" || relation == ">") {
      x.relation = GoldenRelation::FirstMoreDiverse;
    } else if (relation == "Equal" || relation == "=") {
      x.relation = GoldenRelation::Equal;
    } else {
      throw Error(ErrorCode::SchemaError, "unknown golden relation '" + relation + "'");
    }
    table.push_back(std::move(x));
  }
  return table;
}

Json to_json(const std::vector<GoldenExpectation>& table) {
  Json out = Json::array();
  for (const auto& x : table) {
    Json e;
    e["pair"] = x.pair ? to_json(*x.pair) : Json(nullptr);
    e["subset_a"] = std::string(to_string(x.subset_a));
    e["subset_b"] = std::string(to_string(x.subset_b));
    e["relation"] = x.relation == GoldenRelation::FirstMoreDiverse ? "FirstMoreDiverse" : "Equal";
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<Verdict> expected_verdict(const ConceptAttribute& pair, GoldenSubset left,
                                        GoldenSubset right,
                                        const std::vector<GoldenExpectation>& table) {
  auto lookup = [&](GoldenSubset a, GoldenSubset b, bool specific) -> const GoldenExpectation* {
    for (const auto& x : table) {
      if (x.subset_a == a && x.subset_b == b && x.pair.has_value() == specific &&
          (!specific || *x.pair == pair)) {
        return &x;
      }
    }
    return nullptr;
  };
  for (bool specific : {true, false}) {
    if (const auto* x = lookup(left, right, specific)) {
      return x->relation == GoldenRelation::Equal ? Verdict::EquallyDiverse
                                                  : Verdict::LeftMoreDiverse;
    }
    if (const auto* x = lookup(right, left, specific)) {
      return x->relation == GoldenRelation::Equal ? Verdict::EquallyDiverse
                                                  : Verdict::RightMoreDiverse;
    }
  }
  return std::nullopt;
}

Json to_json(const std::vector<GoldenAccuracy>& results) {
  Json out = Json::array();
  for (const auto& r : results) {
    Json e;
    e["variant"] = r.variant;
    e["set_size"] = r.set_size;
    e["accuracy"] = r.n_total ? Json(round_sig12(r.accuracy())) : Json(nullptr);
    e["n_correct"] = r.n_correct;
    e["n_total"] = r.n_total;
    e["n_unscored"] = r.n_unscored;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<GoldenAccuracy> golden_validate(const std::vector<RatingRecord>& records,
                                            const std::vector<GoldenExpectation>& table) {
  std::map<std::pair<std::string, int>, GoldenAccuracy> groups;
  for (const auto& raw : records) {
    const auto r = to_canonical(raw);
    const auto left = golden_subset_from_tag(r.model_left.name);
    const auto right = golden_subset_from_tag(r.model_right.name);
    const int size = static_cast<int>(std::max(r.set_left.size(), r.set_right.size()));
    auto& g = groups[{r.study_id, size}];
    g.variant = r.study_id;
    g.set_size = size;
    const auto expected = expected_verdict(r.pair, left, right, table);
    if (!expected) {
      ++g.n_unscored;
      continue;
    }
    ++g.n_total;
    if (r.verdict == *expected) ++g.n_correct;
  }
  std::vector<GoldenAccuracy> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<GoldenAccuracy> golden_validate_scores(const std::vector<ScoreRecord>& scores,
                                                   const std::vector<GoldenExpectation>& table) {
  std::vector<GoldenAccuracy> out;
  for (const auto& [key, group] : split_by_autorater(scores)) {
    GoldenAccuracy acc;
    acc.variant = key;
    // (pair, replicate) -> subset -> score
    std::map<std::pair<ConceptAttribute, int>, std::map<GoldenSubset, double>> cells;
    for (const auto& s : group) {
      cells[{s.pair, s.replicate}][golden_subset_from_tag(s.model)] = s.score;
    }
    for (const auto& [cell, by_subset] : cells) {
      const auto& pair = cell.first;
      auto applies = [&](const GoldenExpectation& e) {
        if (!by_subset.count(e.subset_a) || !by_subset.count(e.subset_b)) return false;
        if (e.pair) return *e.pair == pair;
        // a pair-specific entry over the same two subsets replaces the wildcard
        return std::none_of(table.begin(), table.end(), [&](const GoldenExpectation& o) {
          return o.pair && *o.pair == pair &&
                 ((o.subset_a == e.subset_a && o.subset_b == e.subset_b) ||
                  (o.subset_a == e.subset_b && o.subset_b == e.subset_a));
        });
      };
      std::set<std::pair<GoldenSubset, GoldenSubset>> covered;
      for (const auto& e : table) {
        if (!applies(e)) continue;
        covered.insert(std::minmax(e.subset_a, e.subset_b));
        const double a = by_subset.at(e.subset_a), b = by_subset.at(e.subset_b);
        const bool ok = e.relation == GoldenRelation::Equal ? a == b : a > b;
        ++acc.n_total;
        if (ok) ++acc.n_correct;
      }
      for (auto a = by_subset.begin(); a != by_subset.end(); ++a) {
        for (auto b = std::next(a); b != by_subset.end(); ++b) {
          if (!covered.count(std::minmax(a->first, b->first))) ++acc.n_unscored;
        }
      }
    }
    out.push_back(std::move(acc));
  }
  return out;
}

CountHistogram count_distribution(const std::vector<RatingRecord>& records, GoldenLabel label) {
  auto matches = [&](const std::string& tag) {
    GoldenSubset subset;
    try {
      subset = golden_subset_from_tag(tag);
    } catch (const Error&) {
      return false;
    }
    const bool diverse = subset != GoldenSubset::ConceptVaries;
    return diverse == (label == GoldenLabel::Diverse);
  };
  std::vector<int> counts;
  int set_size = 0;
  for (const auto& raw : records) {
    const auto r = to_canonical(raw);
    if (!r.has_counts()) continue;
    bool used = false;
    if (matches(r.model_left.name)) counts.push_back(*r.count_left), used = true;
    if (matches(r.model_right.name)) counts.push_back(*r.count_right), used = true;
    if (used) set_size = std::max(set_size, r.set_size());
  }
  CountHistogram hist;
  if (counts.empty()) return hist;
  hist.frequency.assign(static_cast<std::size_t>(set_size) + 1, 0);
  for (int c : counts) ++hist.frequency[static_cast<std::size_t>(c)];
  const auto top = std::max_element(hist.frequency.begin() + 1, hist.frequency.end());
  hist.mode = static_cast<int>(top - hist.frequency.begin());
  return hist;
}

}  // namespace divbench
