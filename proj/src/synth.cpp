#include "divbench/synth.hpp"

#include <cstdio>
#include <random>

#include "divbench/errors.hpp"

namespace divbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string padded(const char* prefix, int i, int width = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

std::vector<std::string> image_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(padded("img_", i, 2));
  return ids;
}

}  // namespace

std::uint64_t unit_seed(std::uint64_t seed, std::string_view model, const ConceptAttribute& pair,
                        int replicate) {
  std::uint64_t h = fnv1a(model);
  h = fnv1a("\x1f", h);
  h = fnv1a(pair.key(), h);
  return splitmix64(seed ^ splitmix64(h ^ static_cast<std::uint64_t>(replicate)));
}

std::vector<ConceptAttribute> synthetic_pairs(int count) {
  static constexpr Category kCategories[] = {Category::FoodAndDrink, Category::Nature,
                                             Category::HumanMade, Category::Other};
  std::vector<ConceptAttribute> pairs;
  for (int i = 0; i < count; ++i) {
    auto concept_name = padded("concept_", i);
    pairs.emplace_back(concept_name, padded("attribute_", i), kCategories[i % 4],
                       "An image of " + concept_name);
  }
  return pairs;
}

EmbeddingSet generate_embedding_set(const SynthModelSpec& spec, const ConceptAttribute& pair,
                                    int replicate, int n) {
  if (spec.model.name.empty()) throw Error(ErrorCode::BadSpec, "model name is empty");
  if (n < 1) throw Error(ErrorCode::BadSpec, "set size must be >= 1");
  if (spec.clusters < 1 || spec.clusters > n) {
    throw Error(ErrorCode::BadSpec, "clusters must lie in [1, set size]");
  }
  if (spec.dim < spec.clusters) throw Error(ErrorCode::BadSpec, "dim must be >= clusters");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::BadSpec, "noise sigma must be >= 0");

  std::mt19937_64 rng(unit_seed(spec.seed, spec.model.name, pair, replicate));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd g(spec.dim, spec.clusters);
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = gauss(rng);
  }
  const Eigen::MatrixXd centers =
      Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
      Eigen::MatrixXd::Identity(spec.dim, spec.clusters);

  EmbeddingSet set;
  set.set_ref = {spec.model, pair, replicate, image_ids(n)};
  set.embedder_name = "synthetic";
  set.l2_normalized = true;
  set.matrix.resize(n, spec.dim);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row = centers.col(i % spec.clusters);
    if (spec.noise_sigma > 0.0) {
      for (Eigen::Index d = 0; d < row.size(); ++d) row(d) += spec.noise_sigma * gauss(rng);
    }
    set.matrix.row(i) = row.transpose() / row.norm();
  }
  return set;
}

int generate_embeddings(const SynthModelSpec& spec, const std::vector<ConceptAttribute>& pairs,
                        int replicates, int n, const std::filesystem::path& root) {
  if (replicates < 1) throw Error(ErrorCode::BadSpec, "replicates must be >= 1");
  int written = 0;
  for (const auto& pair : pairs) {
    for (int rep = 0; rep < replicates; ++rep) {
      const auto set = generate_embedding_set(spec, pair, rep, n);
      const auto dir = set_directory(root, set.set_ref);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
      save_embedding_set(set, dir / kHeaderFile, dir / kDataFile);
      ++written;
    }
  }
  return written;
}

std::vector<PlantedComparison> planted_tournament(const std::vector<std::string>& ranked_best_first,
                                                  const std::vector<ConceptAttribute>& pairs,
                                                  int replicates) {
  std::vector<PlantedComparison> out;
  for (std::size_t a = 0; a < ranked_best_first.size(); ++a) {
    for (std::size_t b = a + 1; b < ranked_best_first.size(); ++b) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (int rep = 0; rep < replicates; ++rep) {
          const bool better_on_left = (p + static_cast<std::size_t>(rep)) % 2 == 0;
          PlantedComparison c;
          c.pair = pairs[p];
          c.model_left.name = ranked_best_first[better_on_left ? a : b];
          c.model_right.name = ranked_best_first[better_on_left ? b : a];
          c.replicate = rep;
          c.winner = better_on_left ? Verdict::LeftMoreDiverse : Verdict::RightMoreDiverse;
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

std::vector<RatingRecord> generate_annotations(const std::vector<PlantedComparison>& truth,
                                               const AnnotationSynthSpec& spec) {
  if (spec.raters < 1) throw Error(ErrorCode::BadSpec, "raters must be >= 1");
  if (!(spec.fidelity >= 0.5 && spec.fidelity <= 1.0)) {
    throw Error(ErrorCode::BadSpec, "fidelity must lie in [0.5, 1]");
  }
  if (spec.set_size < 2) throw Error(ErrorCode::BadSpec, "set size must be >= 2");

  const auto ids = image_ids(spec.set_size);
  std::vector<RatingRecord> out;
  out.reserve(truth.size() * static_cast<std::size_t>(spec.raters));
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const auto& c = truth[t];
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(t + 1)));
    std::bernoulli_distribution faithful(spec.fidelity);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> any_count(1, spec.set_size);
    std::uniform_int_distribution<long long> elapsed(8000, 60000);

    const auto task_id = padded("task_", static_cast<int>(t), 6);
    for (int r = 0; r < spec.raters; ++r) {
      Verdict v = c.winner;
      if (!faithful(rng)) {
        switch (c.winner) {
          case Verdict::LeftMoreDiverse: v = Verdict::RightMoreDiverse; break;
          case Verdict::RightMoreDiverse: v = Verdict::LeftMoreDiverse; break;
          default: v = coin(rng) ? Verdict::LeftMoreDiverse : Verdict::RightMoreDiverse; break;
        }
      }
      int high = std::uniform_int_distribution<int>(2, spec.set_size)(rng);
      int low = std::uniform_int_distribution<int>(1, high - 1)(rng);
      RatingRecord rec;
      switch (v) {
        case Verdict::LeftMoreDiverse: rec.count_left = high, rec.count_right = low; break;
        case Verdict::RightMoreDiverse: rec.count_left = low, rec.count_right = high; break;
        case Verdict::EquallyDiverse: rec.count_left = rec.count_right = any_count(rng); break;
        case Verdict::UnableToAnswer:
          rec.count_left = any_count(rng);
          rec.count_right = any_count(rng);
          break;
      }
      rec.task_id = task_id;
      rec.study_id = spec.study_id;
      rec.pair = c.pair;
      rec.model_left = c.model_left;
      rec.model_right = c.model_right;
      rec.set_left = {c.model_left, c.pair, c.replicate, ids};
      rec.set_right = {c.model_right, c.pair, c.replicate, ids};
      rec.rater_id = padded("rater_", r, 2);
      rec.verdict = v;
      rec.elapsed_ms = elapsed(rng);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace divbench
