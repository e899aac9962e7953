#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "divbench/annotations.hpp"
#include "divbench/stats.hpp"
#include "divbench/vendi.hpp"

namespace divbench {

struct ComparisonCell {
  Significance sign = Significance::NotSignificant;
  double p_value = 1.0;
  int wins_row = 0;
  int wins_col = 0;
  int ties = 0;
  int n_concepts = 0;
  /// Non-empty when the test could not run, e.g. "NoDecisiveConcepts" or "AllZero".
  std::string flag;

  friend bool operator==(const ComparisonCell&, const ComparisonCell&) = default;
};

/// Pairwise significance grid. cell(i, j) compares models[i] (row) with
/// models[j] (column); the diagonal is empty.
class ComparisonMatrix {
 public:
  ComparisonMatrix() = default;
  ComparisonMatrix(std::vector<std::string> models, std::string method);

  const std::vector<std::string>& models() const noexcept { return models_; }
  const std::string& method() const noexcept { return method_; }
  std::size_t size() const noexcept { return models_.size(); }

  const std::optional<ComparisonCell>& cell(std::size_t row, std::size_t col) const {
    return cells_[row * models_.size() + col];
  }
  /// Stores `cell` at (row, col) and its mirror image at (col, row).
  void set_pair(std::size_t row, std::size_t col, const ComparisonCell& cell);

  std::optional<std::size_t> index_of(const std::string& model) const;

  friend bool operator==(const ComparisonMatrix&, const ComparisonMatrix&) = default;

 private:
  std::vector<std::string> models_;
  std::string method_;
  std::vector<std::optional<ComparisonCell>> cells_;
};

Json to_json(const ComparisonMatrix& matrix);
/// Text grid with >, <, = per cell and x on the diagonal.
std::string render_grid(const ComparisonMatrix& matrix);

/// Human ranking: per (pair, model pair) mode over replicates, then a
/// two-sided binomial test on the decisive concepts of each model pair.
ComparisonMatrix rank_human(const std::vector<AggregatedComparison>& aggregated,
                            double alpha_level = 0.05);

/// Autorater ranking: per-concept mean over replicates, Wilcoxon signed-rank
/// on the per-concept differences of each model pair.
ComparisonMatrix rank_auto(const std::vector<ScoreRecord>& scores, double alpha_level = 0.05);

struct WinRateMatrix {
  std::vector<std::string> models;
  /// rates[i][j] = (wins_i - wins_j) / (2 * comparisons), i.e. the win
  /// frequency with ties at half credit, minus 0.5.
  std::vector<std::vector<double>> rates;
};

WinRateMatrix win_rate_matrix(const std::vector<ScoreRecord>& scores);
Json to_json(const WinRateMatrix& matrix);

struct AblationStep {
  int size = 0;
  std::vector<ConceptAttribute> concepts;
  ComparisonMatrix matrix;
};

struct AblationReport {
  std::uint64_t seed = 0;
  ComparisonMatrix full;
  std::vector<AblationStep> steps;
};

/// Reruns rank_human on nested random concept subsets: one seeded shuffle,
/// then the first `size` concepts for every requested size.
AblationReport sufficiency_ablation(const std::vector<AggregatedComparison>& aggregated,
                                    const std::vector<int>& sizes, std::uint64_t seed,
                                    double alpha_level = 0.05);

/// Per model pair, the sign sequence full-set first (e.g. ">>>==") and
/// whether it ever flips between > and <.
Json to_json(const AblationReport& report);

/// "embedder|conditioning kind|prompt": identifies one autorater.
std::string autorater_key(const ScoreRecord& record);

}  // namespace divbench
