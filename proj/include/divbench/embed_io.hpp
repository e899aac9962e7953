#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "divbench/domain.hpp"
#include "divbench/json_io.hpp"

namespace divbench {

enum class ConditioningKind { None, ConceptOnly, AttributeOnly, ConceptAndAttribute, Unrelated };

std::string_view to_string(ConditioningKind kind);
ConditioningKind conditioning_kind_from_string(std::string_view text);

/// How the embeddings were conditioned upstream. Recorded for grouping and
/// reporting only; nothing here changes the numbers.
struct ConditioningSpec {
  ConditioningKind kind = ConditioningKind::None;
  std::optional<std::string> rendered_prompt;

  friend bool operator==(const ConditioningSpec&, const ConditioningSpec&) = default;
  friend auto operator<=>(const ConditioningSpec&, const ConditioningSpec&) = default;
};

/// Throws SchemaError unless a prompt is present exactly when kind != None.
void validate(const ConditioningSpec& spec);

Json to_json(const ConditioningSpec& spec);
/// Accepts either {"kind": ..., "prompt": ...} or a bare kind string.
ConditioningSpec conditioning_from_json(const Json& j);

struct EmbeddingSet {
  SetRef set_ref;
  ConditioningSpec conditioning;
  std::string embedder_name;
  Eigen::MatrixXd matrix;  // row i embeds image i
  bool l2_normalized = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }
};

/// Checks shape against the set reference, finiteness, and the unit-norm
/// claim. Throws SizeMismatch, NonFinite or NotNormalized.
void validate(const EmbeddingSet& set);

struct TokenSet {
  SetRef set_ref;
  std::vector<std::string> tokens;
};

inline constexpr std::string_view kHeaderFile = "emb.json";
inline constexpr std::string_view kDataFile = "emb.f32";
inline constexpr std::string_view kTokenFile = "tokens.jsonl";

Json header_json(const EmbeddingSet& set);

EmbeddingSet load_embedding_set(const std::filesystem::path& header_path,
                                const std::filesystem::path& data_path);

/// Writes the JSON header and little-endian float32 row-major data.
void save_embedding_set(const EmbeddingSet& set, const std::filesystem::path& header_path,
                        const std::filesystem::path& data_path);

/// Reads {image_id, token} records and orders them like `set_ref.image_ids`.
TokenSet load_token_set(const std::filesystem::path& path, const SetRef& set_ref);
void save_token_set(const TokenSet& tokens, const std::filesystem::path& path);

struct CorpusEntry {
  SetRef set_ref;
  std::filesystem::path directory;
};

struct CorpusScan {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> warnings;
};

/// Enumerates `<root>/<model>/<concept>__<attribute>/<replicate>/` set
/// directories. Malformed entries become warnings; order is sorted by
/// (model, pair directory, replicate) independent of listing order.
CorpusScan scan_corpus(const std::filesystem::path& root);

/// Directory of one set inside a corpus root.
std::filesystem::path set_directory(const std::filesystem::path& root, const SetRef& ref);

}  // namespace divbench
