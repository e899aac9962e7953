#include "divbench/embed_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <unordered_map>

#include "divbench/errors.hpp"

namespace divbench {

namespace fs = std::filesystem;

std::string_view to_string(ConditioningKind kind) {
  switch (kind) {
    case ConditioningKind::None: return "None";
    case ConditioningKind::ConceptOnly: return "ConceptOnly";
    case ConditioningKind::AttributeOnly: return "AttributeOnly";
    case ConditioningKind::ConceptAndAttribute: return "ConceptAndAttribute";
    case ConditioningKind::Unrelated: return "Unrelated";
  }
  return "None";
}

ConditioningKind conditioning_kind_from_string(std::string_view text) {
  for (auto kind : {ConditioningKind::None, ConditioningKind::ConceptOnly,
                    ConditioningKind::AttributeOnly, ConditioningKind::ConceptAndAttribute,
                    ConditioningKind::Unrelated}) {
    if (text == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::SchemaError, "unknown conditioning kind '" + std::string(text) + "'");
}

void validate(const ConditioningSpec& spec) {
  const bool has_prompt = spec.rendered_prompt.has_value();
  if (spec.kind == ConditioningKind::None && has_prompt) {
    throw Error(ErrorCode::SchemaError, "unconditioned embeddings cannot carry a prompt");
  }
  if (spec.kind != ConditioningKind::None && !has_prompt) {
    throw Error(ErrorCode::SchemaError,
                "conditioning " + std::string(to_string(spec.kind)) + " requires a prompt");
  }
}

Json to_json(const ConditioningSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  if (spec.rendered_prompt) j["prompt"] = *spec.rendered_prompt;
  return j;
}

ConditioningSpec conditioning_from_json(const Json& j) {
  ConditioningSpec spec;
  if (j.is_null()) return spec;
  if (j.is_string()) {
    spec.kind = conditioning_kind_from_string(j.get<std::string>());
    return spec;
  }
  spec.kind = conditioning_kind_from_string(require_string(j, "kind"));
  if (j.contains("prompt") && !j["prompt"].is_null()) spec.rendered_prompt = require_string(j, "prompt");
  validate(spec);
  return spec;
}

void validate(const EmbeddingSet& set) {
  const auto n = set.matrix.rows();
  if (static_cast<std::size_t>(n) != set.set_ref.size()) {
    throw Error(ErrorCode::SizeMismatch, std::to_string(n) + " rows for " +
                                             std::to_string(set.set_ref.size()) + " image ids");
  }
  if (set.matrix.cols() < 1) throw Error(ErrorCode::SizeMismatch, "embedding dim must be >= 1");
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < set.matrix.cols(); ++c) {
      if (!std::isfinite(set.matrix(r, c))) {
        throw Error(ErrorCode::NonFinite, "entry at row " + std::to_string(r) + ", col " +
                                              std::to_string(c));
      }
    }
    if (set.l2_normalized && std::abs(set.matrix.row(r).norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::NotNormalized,
                  "row " + std::to_string(r) + " has norm " + std::to_string(set.matrix.row(r).norm()));
    }
  }
}

Json header_json(const EmbeddingSet& set) {
  Json j;
  j["rows"] = set.matrix.rows();
  j["dim"] = set.matrix.cols();
  j["dtype"] = "f32";
  j["layout"] = "row-major";
  j["l2_normalized"] = set.l2_normalized;
  j["model"] = set.set_ref.model.name;
  j["concept"] = set.set_ref.pair.concept_name();
  j["attribute"] = set.set_ref.pair.attribute();
  j["replicate"] = set.set_ref.replicate;
  j["image_ids"] = set.set_ref.image_ids;
  j["conditioning"] = to_json(set.conditioning);
  j["embedder"] = set.embedder_name;
  return j;
}

namespace {

struct Header {
  long long rows = 0;
  long long dim = 0;
  bool l2_normalized = false;
  SetRef set_ref;
  ConditioningSpec conditioning;
  std::string embedder;
};

Header parse_header(const Json& j) {
  Header h;
  h.rows = require_int(j, "rows");
  h.dim = require_int(j, "dim");
  if (h.rows < 1 || h.dim < 1) throw Error(ErrorCode::SchemaError, "rows and dim must be >= 1");
  if (require_string(j, "dtype") != "f32") throw Error(ErrorCode::SchemaError, "dtype must be f32");
  if (require_string(j, "layout") != "row-major") {
    throw Error(ErrorCode::SchemaError, "layout must be row-major");
  }
  h.l2_normalized = require_bool(j, "l2_normalized");
  require(j, "image_ids");
  h.set_ref = set_ref_from_json(j);
  h.conditioning = conditioning_from_json(require(j, "conditioning"));
  h.embedder = require_string(j, "embedder");
  if (static_cast<std::size_t>(h.rows) != h.set_ref.size()) {
    throw Error(ErrorCode::SizeMismatch, "header rows " + std::to_string(h.rows) + " vs " +
                                             std::to_string(h.set_ref.size()) + " image ids");
  }
  return h;
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

}  // namespace

EmbeddingSet load_embedding_set(const fs::path& header_path, const fs::path& data_path) {
  const Header h = parse_header(read_json_file(header_path));

  std::error_code ec;
  const auto bytes = fs::file_size(data_path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot stat " + data_path.string());
  const auto expected = static_cast<std::uintmax_t>(h.rows) * static_cast<std::uintmax_t>(h.dim) * 4u;
  if (bytes != expected) {
    throw Error(ErrorCode::SizeMismatch, data_path.string() + " has " + std::to_string(bytes) +
                                             " bytes, header implies " + std::to_string(expected));
  }

  std::vector<std::uint32_t> raw(static_cast<std::size_t>(h.rows * h.dim));
  std::ifstream in(data_path, std::ios::binary);
  if (!in || !in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes))) {
    throw Error(ErrorCode::IoError, "cannot read " + data_path.string());
  }

  EmbeddingSet set;
  set.set_ref = h.set_ref;
  set.conditioning = h.conditioning;
  set.embedder_name = h.embedder;
  set.l2_normalized = h.l2_normalized;
  set.matrix.resize(h.rows, h.dim);
  for (long long r = 0; r < h.rows; ++r) {
    for (long long c = 0; c < h.dim; ++c) {
      const std::uint32_t bits = to_little_endian(raw[static_cast<std::size_t>(r * h.dim + c)]);
      float value;
      std::memcpy(&value, &bits, sizeof value);
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFinite, data_path.string() + " row " + std::to_string(r) +
                                              ", col " + std::to_string(c));
      }
      set.matrix(r, c) = value;
    }
  }
  validate(set);
  return set;
}

void save_embedding_set(const EmbeddingSet& set, const fs::path& header_path,
                        const fs::path& data_path) {
  validate(set.set_ref);
  std::vector<std::uint32_t> raw;
  raw.reserve(static_cast<std::size_t>(set.matrix.size()));
  for (Eigen::Index r = 0; r < set.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < set.matrix.cols(); ++c) {
      const auto value = static_cast<float>(set.matrix(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &value, sizeof bits);
      raw.push_back(to_little_endian(bits));
    }
  }
  std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + data_path.string());
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + data_path.string());
  write_text_file(header_path, header_json(set).dump(2) + "\n");
}

TokenSet load_token_set(const fs::path& path, const SetRef& set_ref) {
  std::unordered_map<std::string, std::string> by_image;
  for_each_jsonl_file(path, [&](const Json& j, std::size_t line_no) {
    auto id = require_string(j, "image_id");
    auto token = require_string(j, "token");
    if (!by_image.emplace(id, std::move(token)).second) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) +
                                              " duplicate record for image '" + id + "'");
    }
  });
  TokenSet out;
  out.set_ref = set_ref;
  for (const auto& id : set_ref.image_ids) {
    auto it = by_image.find(id);
    if (it == by_image.end()) {
      throw Error(ErrorCode::MissingImage, "no token for image '" + id + "' in " + path.string());
    }
    out.tokens.push_back(it->second);
  }
  return out;
}

void save_token_set(const TokenSet& tokens, const fs::path& path) {
  if (tokens.tokens.size() != tokens.set_ref.size()) {
    throw Error(ErrorCode::SizeMismatch, "token count differs from set size");
  }
  std::vector<Json> lines;
  for (std::size_t i = 0; i < tokens.tokens.size(); ++i) {
    Json j;
    j["image_id"] = tokens.set_ref.image_ids[i];
    j["token"] = tokens.tokens[i];
    lines.push_back(std::move(j));
  }
  write_text_file(path, dump_jsonl(lines));
}

fs::path set_directory(const fs::path& root, const SetRef& ref) {
  return root / ref.model.name / ref.pair.key() / std::to_string(ref.replicate);
}

namespace {

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<int> parse_replicate(const std::string& name) {
  if (name.empty() || name.size() > 9) return std::nullopt;
  if (!std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(name);
}

}  // namespace

CorpusScan scan_corpus(const fs::path& root) {
  CorpusScan scan;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    scan.warnings.push_back(root.string() + ": not a directory");
    return scan;
  }
  struct Keyed {
    std::string model, pair_dir;
    int replicate;
    CorpusEntry entry;
  };
  std::vector<Keyed> found;
  for (const auto& model_dir : sorted_subdirs(root)) {
    for (const auto& pair_dir : sorted_subdirs(model_dir)) {
      const auto pair_name = pair_dir.filename().string();
      if (pair_name.find("__") == std::string::npos) {
        scan.warnings.push_back(pair_dir.string() + ": expected <concept>__<attribute>");
        continue;
      }
      for (const auto& rep_dir : sorted_subdirs(pair_dir)) {
        const auto rep = parse_replicate(rep_dir.filename().string());
        if (!rep) {
          scan.warnings.push_back(rep_dir.string() + ": replicate directory is not an integer");
          continue;
        }
        const auto header = rep_dir / kHeaderFile;
        const auto data = rep_dir / kDataFile;
        try {
          if (!fs::exists(header) || !fs::exists(data)) {
            throw Error(ErrorCode::IoError, "missing " + std::string(kHeaderFile) + " or " +
                                                std::string(kDataFile));
          }
          const Header h = parse_header(read_json_file(header));
          if (fs::file_size(data) != static_cast<std::uintmax_t>(h.rows * h.dim * 4)) {
            throw Error(ErrorCode::SizeMismatch, "data length disagrees with header");
          }
          if (h.set_ref.model.name != model_dir.filename().string() ||
              h.set_ref.pair.key() != pair_name || h.set_ref.replicate != *rep) {
            throw Error(ErrorCode::SchemaError, "header does not match directory location");
          }
          found.push_back({h.set_ref.model.name, pair_name, *rep, {h.set_ref, rep_dir}});
        } catch (const std::exception& e) {
          scan.warnings.push_back(rep_dir.string() + ": " + e.what());
        }
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.model, a.pair_dir, a.replicate) < std::tie(b.model, b.pair_dir, b.replicate);
  });
  for (auto& k : found) scan.entries.push_back(std::move(k.entry));
  return scan;
}

}  // namespace divbench
