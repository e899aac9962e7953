#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "divbench/embed_io.hpp"

namespace divbench {

/// Cosine-similarity kernel of one image set. Construction checks symmetry
/// (1e-12) and a unit diagonal (1e-9).
class KernelMatrix {
 public:
  explicit KernelMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index n() const noexcept { return values_.rows(); }

 private:
  Eigen::MatrixXd values_;
};

/// Eigenvalues of K/n, sorted descending, after clipping of round-off
/// negatives.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<bool> clipped;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct VendiScore {
  double value = 1.0;
  SetRef set_ref;
  ConditioningSpec conditioning;
  std::string embedder_name;
};

/// Rows are rescaled to unit L2 norm before K = X X^T; a zero row throws
/// ZeroNormRow.
KernelMatrix cosine_kernel(const Eigen::MatrixXd& embeddings);
KernelMatrix cosine_kernel(const EmbeddingSet& set);

/// Eigenvalues in [-1e-8 n, 0) are clipped to zero and flagged; anything
/// more negative throws NotPSD.
Spectrum spectrum(const KernelMatrix& kernel);

/// exp of the Shannon entropy (natural log, 0 log 0 = 0) of the spectrum.
double vendi_score(const Spectrum& spec);

/// Kernel, spectrum and score in one step.
double vendi_of_matrix(const Eigen::MatrixXd& embeddings);
VendiScore vendi_of_set(const EmbeddingSet& set);

/// Number of distinct tokens after trimming (and case folding if asked).
int unique_token_diversity(const TokenSet& tokens, bool case_fold = true);
int unique_token_diversity(const std::vector<std::string>& tokens, bool case_fold = true);

/// One autorater's diversity score for one image set.
struct ScoreRecord {
  std::string model;
  ConceptAttribute pair;
  int replicate = 0;
  std::string embedder;
  ConditioningSpec conditioning;
  double score = 0.0;
};

ScoreRecord to_score_record(const VendiScore& vs);
Json to_json(const ScoreRecord& record);
ScoreRecord score_record_from_json(const Json& j);
std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path);
void write_score_records(const std::vector<ScoreRecord>& records, const std::filesystem::path& path);

}  // namespace divbench
