#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "divbench/annotations.hpp"
#include "divbench/embed_io.hpp"

namespace divbench {

/// A synthetic model whose image sets are drawn around `clusters`
/// orthonormal centers with isotropic Gaussian noise.
struct SynthModelSpec {
  ModelId model;
  int clusters = 1;
  double noise_sigma = 0.0;
  int dim = 16;
  std::uint64_t seed = 0;
};

/// Seed of one (model, pair, replicate) unit, independent of generation order.
std::uint64_t unit_seed(std::uint64_t seed, std::string_view model, const ConceptAttribute& pair,
                        int replicate);

/// "concept_000"/"attribute_000", ... with categories cycling.
std::vector<ConceptAttribute> synthetic_pairs(int count);

/// One set: image i sits on center i mod k, noise is added, rows are
/// renormalized. Throws BadSpec for k < 1, k > n, dim < k or sigma < 0.
EmbeddingSet generate_embedding_set(const SynthModelSpec& spec, const ConceptAttribute& pair,
                                    int replicate, int n);

/// Writes every (pair, replicate) set of `spec` under `root` in the corpus
/// layout. Returns the number of sets written.
int generate_embeddings(const SynthModelSpec& spec, const std::vector<ConceptAttribute>& pairs,
                        int replicates, int n, const std::filesystem::path& root);

struct PlantedComparison {
  ConceptAttribute pair;
  ModelId model_left;
  ModelId model_right;
  int replicate = 0;
  Verdict winner = Verdict::EquallyDiverse;
};

/// Every model pair on every (pair, replicate), the earlier model in
/// `ranked_best_first` always being the more diverse one. Sides alternate.
std::vector<PlantedComparison> planted_tournament(const std::vector<std::string>& ranked_best_first,
                                                  const std::vector<ConceptAttribute>& pairs,
                                                  int replicates);

struct AnnotationSynthSpec {
  int raters = 5;
  /// Probability a rater reports the planted verdict; otherwise the opposite
  /// side (a coin flip between sides when the truth is EquallyDiverse).
  double fidelity = 1.0;
  std::uint64_t seed = 0;
  int set_size = kDefaultSetSize;
  std::string study_id = "synth";
};

/// One task per planted comparison, `raters` ratings each, counts drawn
/// consistent with every rater's verdict. Throws BadSpec on invalid specs.
std::vector<RatingRecord> generate_annotations(const std::vector<PlantedComparison>& truth,
                                               const AnnotationSynthSpec& spec);

}  // namespace divbench
