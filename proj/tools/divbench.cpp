// divbench: command-line front end for every pipeline stage.
//
// Exit codes: 0 success, 1 validation error (including bad flags), 2 I/O error.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "divbench/annotations.hpp"
#include "divbench/config.hpp"
#include "divbench/embed_io.hpp"
#include "divbench/errors.hpp"
#include "divbench/metric_eval.hpp"
#include "divbench/ranking.hpp"
#include "divbench/service.hpp"
#include "divbench/synth.hpp"
#include "divbench/vendi.hpp"

namespace fs = std::filesystem;
using namespace divbench;

namespace {

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DIVBENCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw Error(ErrorCode::BadInput, "DIVBENCH_THREADS must be a positive integer");
    }
    n = static_cast<unsigned>(v);
  }
  return n;
}

/// Runs fn(i) for i in [0, count) on up to thread_cap() workers. Results are
/// written by index, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_cap(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void emit(const Json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      sizes.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadInput, "bad size '" + item + "' in --sizes");
    }
  }
  if (sizes.empty()) throw Error(ErrorCode::BadInput, "--sizes is empty");
  return sizes;
}

std::vector<ScoreRecord> filter_scores(std::vector<ScoreRecord> scores, const std::string& embedder,
                                       const std::string& conditioning) {
  std::erase_if(scores, [&](const ScoreRecord& r) {
    return (!embedder.empty() && r.embedder != embedder) ||
           (!conditioning.empty() && to_string(r.conditioning.kind) != conditioning);
  });
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores left after filtering");
  return scores;
}

std::map<std::string, std::vector<ScoreRecord>> by_autorater(const std::vector<ScoreRecord>& scores) {
  std::map<std::string, std::vector<ScoreRecord>> groups;
  for (const auto& s : scores) groups[autorater_key(s)].push_back(s);
  return groups;
}

// Parses "name:k" items, e.g. "m1:1,m2:2".
std::vector<std::pair<std::string, int>> parse_model_clusters(const std::string& text) {
  std::vector<std::pair<std::string, int>> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw Error(ErrorCode::BadSpec, "model spec '" + item + "' must look like name:clusters");
    }
    try {
      out.emplace_back(item.substr(0, colon), std::stoi(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadSpec, "bad cluster count in '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::BadSpec, "no models given");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) throw Error(ErrorCode::BadSpec, "empty model name in list");
    out.push_back(item);
  }
  if (out.size() < 2) throw Error(ErrorCode::BadSpec, "need at least two models");
  return out;
}

AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity measurement workbench"};
  app.require_subcommand(1);

  // vendi compute
  auto* vendi = app.add_subcommand("vendi", "Vendi scores from an embedding corpus");
  vendi->require_subcommand(1);
  auto* vendi_compute = vendi->add_subcommand("compute", "Score every set in a corpus");
  std::string corpus, out;
  bool with_tokens = false;
  vendi_compute->add_option("--corpus", corpus, "Corpus root directory")->required();
  vendi_compute->add_option("--out", out, "Output scores JSONL")->required();
  vendi_compute->add_flag("--tokens", with_tokens, "Also score tokens.jsonl files by unique count");

  // rank human | auto
  auto* rank = app.add_subcommand("rank", "Pairwise model ranking with significance");
  rank->require_subcommand(1);
  std::string annotations, scores_path, embedder, conditioning;
  double alpha = 0.05;
  bool render = false;
  auto* rank_h = rank->add_subcommand("human", "Rank from human annotations (binomial test)");
  rank_h->add_option("--annotations", annotations)->required();
  rank_h->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  rank_h->add_option("--out", out)->required();
  rank_h->add_flag("--render", render, "Print the text grid");
  auto* rank_a = rank->add_subcommand("auto", "Rank from autorater scores (Wilcoxon test)");
  rank_a->add_option("--scores", scores_path)->required();
  rank_a->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  rank_a->add_option("--out", out)->required();
  rank_a->add_flag("--render", render, "Print the text grid");
  rank_a->add_option("--embedder", embedder, "Keep only this embedder");
  rank_a->add_option("--conditioning", conditioning, "Keep only this conditioning kind");

  auto* winrate = app.add_subcommand("winrate", "Win-rate matrix from autorater scores");
  winrate->add_option("--scores", scores_path)->required();
  winrate->add_option("--out", out)->required();
  winrate->add_option("--embedder", embedder);
  winrate->add_option("--conditioning", conditioning);

  auto* agreement = app.add_subcommand("agreement", "Krippendorff's alpha over verdicts");
  agreement->add_option("--annotations", annotations)->required();
  agreement->add_option("--out", out);

  auto* correlation = app.add_subcommand("correlation", "Spearman of count difference vs verdict");
  correlation->add_option("--annotations", annotations)->required();
  correlation->add_option("--out", out);

  auto* autorater = app.add_subcommand("autorater", "Autorater accuracy against humans");
  autorater->require_subcommand(1);
  std::optional<int> min_gap;
  auto* ar_eval = autorater->add_subcommand("eval", "Pairwise accuracy per autorater");
  ar_eval->add_option("--scores", scores_path)->required();
  ar_eval->add_option("--annotations", annotations)->required();
  ar_eval->add_option("--min-gap", min_gap, "Also report the stratum with count gap > N");
  ar_eval->add_option("--out", out);
  auto* ar_auc = autorater->add_subcommand("auc", "ROC AUC for detecting equal diversity");
  ar_auc->add_option("--scores", scores_path)->required();
  ar_auc->add_option("--annotations", annotations)->required();
  ar_auc->add_option("--out", out);

  auto* golden = app.add_subcommand("golden", "Golden-set validation");
  golden->require_subcommand(1);
  std::string expectations;
  auto* golden_validate_cmd = golden->add_subcommand("validate", "Accuracy on golden comparisons");
  golden_validate_cmd->add_option("--annotations", annotations);
  golden_validate_cmd->add_option("--scores", scores_path);
  golden_validate_cmd->add_option("--expectations", expectations, "Expectation table (default built in)");
  golden_validate_cmd->add_option("--out", out);

  auto* ablate = app.add_subcommand("ablate", "Concept-count sufficiency ablation");
  std::string sizes_text;
  std::uint64_t seed = 0;
  ablate->add_option("--annotations", annotations)->required();
  ablate->add_option("--sizes", sizes_text, "Comma-separated subset sizes")->required();
  ablate->add_option("--seed", seed)->required();
  ablate->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  ablate->add_option("--out", out);

  auto* synth = app.add_subcommand("synth", "Synthetic corpora with planted structure");
  synth->require_subcommand(1);
  int n_pairs = 86, replicates = 10, set_size = kDefaultSetSize, dim = 16, raters = 5;
  double sigma = 0.05, fidelity = 1.0;
  std::string models_text, study_id = "synth";
  auto* synth_emb = synth->add_subcommand("embeddings", "Clustered embedding corpus");
  synth_emb->add_option("--out", out, "Corpus root")->required();
  synth_emb->add_option("--models", models_text, "name:clusters list, e.g. m1:1,m2:2")->required();
  synth_emb->add_option("--sigma", sigma);
  synth_emb->add_option("--pairs", n_pairs);
  synth_emb->add_option("--replicates", replicates);
  synth_emb->add_option("--set-size", set_size);
  synth_emb->add_option("--dim", dim);
  synth_emb->add_option("--seed", seed);
  auto* synth_ann = synth->add_subcommand("annotations", "Rater records for a planted order");
  synth_ann->add_option("--out", out, "Output JSONL")->required();
  synth_ann->add_option("--models", models_text, "Model names, best first")->required();
  synth_ann->add_option("--pairs", n_pairs);
  synth_ann->add_option("--replicates", replicates);
  synth_ann->add_option("--raters", raters);
  synth_ann->add_option("--fidelity", fidelity);
  synth_ann->add_option("--set-size", set_size);
  synth_ann->add_option("--study-id", study_id);
  synth_ann->add_option("--seed", seed);

  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  int port = 8080;
  std::string store_dir, static_dir, host = "127.0.0.1";
  int snapshot_every = 1000;
  serve->add_option("--port", port)->required();
  serve->add_option("--store", store_dir)->required();
  serve->add_option("--host", host);
  serve->add_option("--static", static_dir, "Directory served under /static/");
  serve->add_option("--snapshot-every", snapshot_every);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (vendi_compute->parsed()) {
      const auto scan = scan_corpus(corpus);
      for (const auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
      std::vector<std::vector<ScoreRecord>> per_entry(scan.entries.size());
      parallel_for(scan.entries.size(), [&](std::size_t i) {
        const auto& dir = scan.entries[i].directory;
        const auto set = load_embedding_set(dir / kHeaderFile, dir / kDataFile);
        per_entry[i].push_back(to_score_record(vendi_of_set(set)));
        if (with_tokens && fs::exists(dir / kTokenFile)) {
          ScoreRecord r = per_entry[i].front();
          r.embedder = "unique_tokens";
          r.score = unique_token_diversity(load_token_set(dir / kTokenFile, set.set_ref));
          per_entry[i].push_back(std::move(r));
        }
      });
      std::vector<ScoreRecord> records;
      for (auto& v : per_entry) records.insert(records.end(), v.begin(), v.end());
      write_score_records(records, out);
      std::cerr << records.size() << " scores written\n";
    } else if (rank_h->parsed()) {
      const auto matrix = rank_human(aggregate_tasks(read_rating_records(annotations)), alpha);
      emit(to_json(matrix), out);
      if (render) std::cout << render_grid(matrix);
    } else if (rank_a->parsed()) {
      const auto matrix = rank_auto(filter_scores(read_score_records(scores_path), embedder, conditioning), alpha);
      emit(to_json(matrix), out);
      if (render) std::cout << render_grid(matrix);
    } else if (winrate->parsed()) {
      emit(to_json(win_rate_matrix(filter_scores(read_score_records(scores_path), embedder, conditioning))),
           out);
    } else if (agreement->parsed()) {
      emit(to_json(krippendorff_alpha(read_rating_records(annotations))), out);
    } else if (correlation->parsed()) {
      emit(to_json(count_verdict_correlation(read_rating_records(annotations))), out);
    } else if (ar_eval->parsed()) {
      const auto human = aggregate_tasks(read_rating_records(annotations));
      const auto scores = read_score_records(scores_path);
      Json reports = Json::array();
      for (const auto& r : autorater_accuracy_by_rater(human, scores)) reports.push_back(to_json(r));
      if (min_gap) {
        for (const auto& r : autorater_accuracy_by_rater(human, scores, *min_gap)) reports.push_back(to_json(r));
      }
      emit(reports, out);
    } else if (ar_auc->parsed()) {
      const auto human = aggregate_tasks(read_rating_records(annotations));
      Json reports = Json::array();
      for (const auto& [key, group] : by_autorater(read_score_records(scores_path))) {
        Json j;
        j["autorater"] = key;
        j["auc"] = round_sig12(equal_detection_auc(human, group));
        reports.push_back(std::move(j));
      }
      emit(reports, out);
    } else if (golden_validate_cmd->parsed()) {
      if (annotations.empty() == scores_path.empty()) {
        throw Error(ErrorCode::BadInput, "give exactly one of --annotations and --scores");
      }
      const auto table = expectations.empty() ? default_golden_expectations()
                                              : golden_expectations_from_json(read_json_file(expectations));
      emit(to_json(annotations.empty() ? golden_validate_scores(read_score_records(scores_path), table)
                                       : golden_validate(read_rating_records(annotations), table)),
           out);
    } else if (ablate->parsed()) {
      const auto report = sufficiency_ablation(aggregate_tasks(read_rating_records(annotations)),
                                               parse_sizes(sizes_text), seed, alpha);
      emit(to_json(report), out);
    } else if (synth_emb->parsed()) {
      const auto pairs = synthetic_pairs(n_pairs);
      const auto models = parse_model_clusters(models_text);
      std::vector<int> written(models.size());
      parallel_for(models.size(), [&](std::size_t i) {
        SynthModelSpec spec{ModelId{models[i].first}, models[i].second, sigma, dim, seed};
        written[i] = generate_embeddings(spec, pairs, replicates, set_size, out);
      });
      int total = 0;
      for (int w : written) total += w;
      std::cerr << total << " sets written\n";
    } else if (synth_ann->parsed()) {
      AnnotationSynthSpec spec;
      spec.raters = raters;
      spec.fidelity = fidelity;
      spec.seed = seed;
      spec.set_size = set_size;
      spec.study_id = study_id;
      const auto records =
          generate_annotations(planted_tournament(split_names(models_text), synthetic_pairs(n_pairs), replicates), spec);
      write_rating_records(records, out);
      std::cerr << records.size() << " records written\n";
    } else if (serve->parsed()) {
      StudyStore store(store_dir, snapshot_every);
      std::optional<fs::path> static_path;
      if (!static_dir.empty()) static_path = static_dir;
      AnnotationServer server(store, static_path);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error(ErrorCode::IoError, "cannot listen on port " + std::to_string(port));
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
