#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divbench/annotations.hpp"
#include "divbench/vendi.hpp"

namespace divbench {

struct AccuracyReport {
  std::string embedder_name;
  ConditioningSpec conditioning;
  /// Empty when no comparison survived the filters.
  std::optional<double> accuracy;
  int n_pairs = 0;
  int n_correct = 0;
  int n_excluded_equal = 0;
  int n_excluded_unable = 0;
  int n_excluded_gap = 0;
  int n_score_ties = 0;
  /// Set for the GapGreaterThan(k) stratum, empty for All.
  std::optional<int> min_gap;
};

Json to_json(const AccuracyReport& report);

/// Directional agreement between one autorater and the per-replicate human
/// verdicts. Equal and unable-to-answer verdicts are excluded; exact score
/// ties count as wrong. With min_gap > 0 only comparisons whose modal count
/// gap exceeds it are kept; min_gap = 0 is the All stratum.
AccuracyReport autorater_accuracy(const std::vector<AggregatedComparison>& human,
                                  const std::vector<ScoreRecord>& scores,
                                  std::optional<int> min_gap = std::nullopt);

/// One report per autorater found in `scores`, ordered by autorater key.
std::vector<AccuracyReport> autorater_accuracy_by_rater(
    const std::vector<AggregatedComparison>& human, const std::vector<ScoreRecord>& scores,
    std::optional<int> min_gap = std::nullopt);

/// AUC of |s_left - s_right| for separating unequal (positive) from equal
/// human verdicts.
double equal_detection_auc(const std::vector<AggregatedComparison>& human,
                           const std::vector<ScoreRecord>& scores);

/// Golden-set subsets: (i) concept fixed, aspect varies; (ii) concept
/// varies, aspect fixed; (iii) both vary.
enum class GoldenSubset { AspectVaries, ConceptVaries, BothVary };

std::string_view to_string(GoldenSubset s);
/// Accepts "i"/"ii"/"iii" or "aspect_varies"/"concept_varies"/"both_vary";
/// anything else throws UnknownSubsetTag.
GoldenSubset golden_subset_from_tag(std::string_view tag);

enum class GoldenRelation { FirstMoreDiverse, Equal };

struct GoldenExpectation {
  std::optional<ConceptAttribute> pair;  // empty: applies to every pair
  GoldenSubset subset_a = GoldenSubset::AspectVaries;
  GoldenSubset subset_b = GoldenSubset::ConceptVaries;
  GoldenRelation relation = GoldenRelation::FirstMoreDiverse;
};

/// (i) > (ii), (iii) > (ii), (ii) = (iii).
std::vector<GoldenExpectation> default_golden_expectations();
std::vector<GoldenExpectation> golden_expectations_from_json(const Json& j);
Json to_json(const std::vector<GoldenExpectation>& table);

/// Verdict the table predicts for (left, right), or empty when no entry
/// covers the pair of subsets. Entries in the given orientation take
/// precedence over mirrored ones, pair-specific over wildcard.
std::optional<Verdict> expected_verdict(const ConceptAttribute& pair, GoldenSubset left,
                                         GoldenSubset right,
                                         const std::vector<GoldenExpectation>& table);

struct GoldenAccuracy {
  std::string variant;  // study id for annotations, autorater key for scores
  int set_size = 0;
  int n_correct = 0;
  int n_total = 0;
  int n_unscored = 0;  // comparisons no expectation covers
  double accuracy() const { return n_total ? static_cast<double>(n_correct) / n_total : 0.0; }
};

Json to_json(const std::vector<GoldenAccuracy>& results);

/// Per-rater golden accuracy grouped by (study_id, set size). Model names
/// of golden records are subset tags.
std::vector<GoldenAccuracy> golden_validate(const std::vector<RatingRecord>& records,
                                            const std::vector<GoldenExpectation>& table);

/// Golden accuracy of autoraters: every expectation entry is checked on
/// each (pair, replicate) where both subsets were scored; higher score means
/// more diverse, equal scores mean equal.
std::vector<GoldenAccuracy> golden_validate_scores(const std::vector<ScoreRecord>& scores,
                                                   const std::vector<GoldenExpectation>& table);

enum class GoldenLabel { Diverse, NonDiverse };

struct CountHistogram {
  /// frequency[c] = number of sides counted c (index 0 unused).
  std::vector<int> frequency;
  std::optional<int> mode;
};

/// Distribution of the counts given to golden sides with the given label:
/// Diverse = subsets (i) and (iii), NonDiverse = subset (ii). Sides with
/// other tags are ignored.
CountHistogram count_distribution(const std::vector<RatingRecord>& records, GoldenLabel label);

}  // namespace divbench
