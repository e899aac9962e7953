#include "divbench/vendi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "divbench/errors.hpp"

namespace divbench {

KernelMatrix::KernelMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  const auto n = values_.rows();
  if (n < 1 || values_.cols() != n) {
    throw Error(ErrorCode::InvalidKernel, "kernel must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values_(i, i) - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidKernel, "diagonal entry " + std::to_string(i) + " is not 1");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!std::isfinite(values_(i, j)) || std::abs(values_(i, j) - values_(j, i)) > 1e-12) {
        throw Error(ErrorCode::InvalidKernel, "kernel is not symmetric");
      }
    }
  }
}

KernelMatrix cosine_kernel(const Eigen::MatrixXd& embeddings) {
  if (embeddings.rows() < 1) throw Error(ErrorCode::BadInput, "empty embedding set");
  Eigen::MatrixXd unit = embeddings;
  for (Eigen::Index r = 0; r < unit.rows(); ++r) {
    const double norm = unit.row(r).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::ZeroNormRow, "row " + std::to_string(r));
    }
    unit.row(r) /= norm;
  }
  Eigen::MatrixXd k = unit * unit.transpose();
  // Exact symmetry; the product can differ in the last bit across triangles.
  k = (0.5 * (k + k.transpose())).eval();
  return KernelMatrix(std::move(k));
}

KernelMatrix cosine_kernel(const EmbeddingSet& set) { return cosine_kernel(set.matrix); }

Spectrum spectrum(const KernelMatrix& kernel) {
  const auto n = kernel.n();
  const Eigen::MatrixXd scaled = kernel.values() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scaled, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPSD, "symmetric eigensolver did not converge");
  }
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(values.begin(), values.end(), std::greater<>());

  const double floor = -1e-8 * static_cast<double>(n);
  Spectrum out;
  out.eigenvalues.reserve(values.size());
  out.clipped.reserve(values.size());
  for (double v : values) {
    if (v < floor) {
      throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(v) + " below tolerance");
    }
    const bool clip = v < 0.0;
    out.eigenvalues.push_back(clip ? 0.0 : std::min(v, 1.0));
    out.clipped.push_back(clip);
  }
  return out;
}

double vendi_score(const Spectrum& spec) {
  double entropy = 0.0;
  for (double lambda : spec.eigenvalues) {
    if (lambda > 0.0) entropy -= lambda * std::log(lambda);
  }
  return std::exp(entropy);
}

double vendi_of_matrix(const Eigen::MatrixXd& embeddings) {
  return vendi_score(spectrum(cosine_kernel(embeddings)));
}

VendiScore vendi_of_set(const EmbeddingSet& set) {
  VendiScore vs;
  vs.value = vendi_of_matrix(set.matrix);
  vs.set_ref = set.set_ref;
  vs.conditioning = set.conditioning;
  vs.embedder_name = set.embedder_name;
  return vs;
}

int unique_token_diversity(const std::vector<std::string>& tokens, bool case_fold) {
  if (tokens.empty()) throw Error(ErrorCode::BadInput, "token list is empty");
  std::set<std::string> distinct;
  for (const auto& t : tokens) distinct.insert(normalize_label(t, case_fold));
  return static_cast<int>(distinct.size());
}

int unique_token_diversity(const TokenSet& tokens, bool case_fold) {
  return unique_token_diversity(tokens.tokens, case_fold);
}

ScoreRecord to_score_record(const VendiScore& vs) {
  return {vs.set_ref.model.name, vs.set_ref.pair, vs.set_ref.replicate, vs.embedder_name,
          vs.conditioning, vs.value};
}

Json to_json(const ScoreRecord& record) {
  Json j;
  j["model"] = record.model;
  j["concept"] = record.pair.concept_name();
  j["attribute"] = record.pair.attribute();
  j["replicate"] = record.replicate;
  j["embedder"] = record.embedder;
  j["conditioning"] = to_json(record.conditioning);
  j["score"] = round_sig12(record.score);
  return j;
}

ScoreRecord score_record_from_json(const Json& j) {
  ScoreRecord r;
  r.model = require_string(j, "model");
  if (r.model.empty()) throw Error(ErrorCode::SchemaError, "empty model name");
  r.pair = ConceptAttribute(require_string(j, "concept"), require_string(j, "attribute"));
  r.replicate = static_cast<int>(require_int(j, "replicate"));
  r.embedder = require_string(j, "embedder");
  r.conditioning = j.contains("conditioning") ? conditioning_from_json(j["conditioning"])
                                              : ConditioningSpec{};
  r.score = require_number(j, "score");
  if (!std::isfinite(r.score)) throw Error(ErrorCode::NonFinite, "score");
  return r;
}

std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path) {
  std::vector<ScoreRecord> out;
  for_each_jsonl_file(path, [&](const Json& j, std::size_t line_no) {
    try {
      out.push_back(score_record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

void write_score_records(const std::vector<ScoreRecord>& records,
                         const std::filesystem::path& path) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_text_file(path, dump_jsonl(lines));
}

}  // namespace divbench
