#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divbench/domain.hpp"
#include "divbench/json_io.hpp"

namespace divbench {

enum class Verdict { LeftMoreDiverse, RightMoreDiverse, EquallyDiverse, UnableToAnswer };

inline constexpr int kVerdictCount = 4;

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view text);
/// The same judgment seen with the sides exchanged.
Verdict mirror(Verdict v);

/// One rater's side-by-side judgment. Counts and verdict are in the frame
/// the rater saw; `displayed_swap` says that frame had the sides exchanged.
struct RatingRecord {
  std::string task_id;
  std::string study_id;
  ConceptAttribute pair;
  ModelId model_left;
  ModelId model_right;
  SetRef set_left;
  SetRef set_right;
  std::string rater_id;
  std::optional<int> count_left;
  std::optional<int> count_right;
  Verdict verdict = Verdict::UnableToAnswer;
  long long elapsed_ms = 0;
  bool displayed_swap = false;

  /// Upper bound for counts: the larger set size, or the default when the
  /// record carries no image ids.
  int set_size() const;
  bool has_counts() const { return count_left.has_value() && count_right.has_value(); }

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

void validate(const RatingRecord& record);
/// Counts and verdict mirrored back to the model_left/model_right frame.
RatingRecord to_canonical(RatingRecord record);

Json to_json(const RatingRecord& record);
RatingRecord rating_record_from_json(const Json& j);
/// Lines carrying a "trailer" key (export footers) are skipped.
std::vector<RatingRecord> read_rating_records(const std::filesystem::path& path);
std::vector<RatingRecord> read_rating_records(std::istream& in, const std::string& context);
void write_rating_records(const std::vector<RatingRecord>& records,
                          const std::filesystem::path& path);

struct AggregatedComparison {
  ConceptAttribute pair;
  ModelId model_left;
  ModelId model_right;
  int replicate = 0;
  int replicate_right = 0;
  Verdict verdict = Verdict::UnableToAnswer;
  int n_ratings = 0;
  /// Mode of per-rater max(count_left, count_right), ties to the smaller.
  std::optional<int> modal_count;
  /// Mode of per-rater |count_left - count_right|, ties to the smaller.
  std::optional<int> modal_count_gap;
};

/// left > right -> LeftMoreDiverse, right > left -> RightMoreDiverse,
/// equal -> EquallyDiverse. Throws OutOfRange outside [1, set_size].
Verdict infer_verdict_from_counts(int count_left, int count_right,
                                  int set_size = kDefaultSetSize);

/// Most frequent verdict with the tie rules: UnableToAnswer loses every tie
/// it is part of, any remaining tie becomes EquallyDiverse.
Verdict mode_verdict(const std::vector<Verdict>& verdicts);

/// Reduces all ratings of one task (canonical frame) to one verdict.
AggregatedComparison aggregate_mode(const std::vector<RatingRecord>& records);

/// aggregate_mode for every task_id, sorted by task_id.
std::vector<AggregatedComparison> aggregate_tasks(const std::vector<RatingRecord>& records);

/// Second-level mode over replicates: one entry per (pair, model pair),
/// oriented so model_left < model_right by name. `replicate` is -1.
std::vector<AggregatedComparison> aggregate_per_concept(
    const std::vector<AggregatedComparison>& comparisons);

enum class AgreementLevel { Nominal };

struct AgreementReport {
  double alpha = 1.0;
  int n_units = 0;
  int n_raters = 0;
  AgreementLevel level = AgreementLevel::Nominal;
  /// Set when every pairable value is identical; alpha is then 1 by convention.
  bool zero_expected_disagreement = false;
};

/// Nominal Krippendorff alpha from the coincidence matrix. Each unit lists
/// the category indices (0..n_categories-1) it received; units with fewer
/// than two values are not pairable. Needs at least two pairable units.
AgreementReport krippendorff_alpha_nominal(const std::vector<std::vector<int>>& units,
                                           int n_categories);

/// Units are task ids, values the canonical verdicts.
AgreementReport krippendorff_alpha(const std::vector<RatingRecord>& records);

struct CorrelationReport {
  double rho = 0.0;
  double p_value = 1.0;
  int n = 0;
  bool exact_p = false;
};

/// Spearman correlation between count_left - count_right and the verdict
/// coded Right=-1, Equal=0, Left=+1. UnableToAnswer and count-less records
/// are dropped. Exact permutation p-value for n <= 10, t approximation above.
CorrelationReport count_verdict_correlation(const std::vector<RatingRecord>& records);

/// The same on raw vectors, used by the record overload.
CorrelationReport spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

Json to_json(const AgreementReport& report);
Json to_json(const CorrelationReport& report);

}  // namespace divbench
