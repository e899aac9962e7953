#include "divbench/ranking.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "divbench/errors.hpp"

namespace divbench {

ComparisonMatrix::ComparisonMatrix(std::vector<std::string> models, std::string method)
    : models_(std::move(models)), method_(std::move(method)), cells_(models_.size() * models_.size()) {}

void ComparisonMatrix::set_pair(std::size_t row, std::size_t col, const ComparisonCell& cell) {
  if (row == col || row >= models_.size() || col >= models_.size()) {
    throw Error(ErrorCode::BadInput, "invalid comparison cell index");
  }
  ComparisonCell mirrored = cell;
  std::swap(mirrored.wins_row, mirrored.wins_col);
  if (cell.sign == Significance::Greater) mirrored.sign = Significance::Less;
  if (cell.sign == Significance::Less) mirrored.sign = Significance::Greater;
  cells_[row * models_.size() + col] = cell;
  cells_[col * models_.size() + row] = mirrored;
}

std::optional<std::size_t> ComparisonMatrix::index_of(const std::string& model) const {
  auto it = std::find(models_.begin(), models_.end(), model);
  if (it == models_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - models_.begin());
}

Json to_json(const ComparisonMatrix& matrix) {
  Json j;
  j["models"] = matrix.models();
  j["method"] = matrix.method();
  Json cells = Json::array();
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      const auto& cell = matrix.cell(r, c);
      if (!cell) continue;
      Json e;
      e["row"] = matrix.models()[r];
      e["col"] = matrix.models()[c];
      e["sign"] = std::string(to_symbol(cell->sign));
      e["p"] = round_sig12(cell->p_value);
      e["wins_row"] = cell->wins_row;
      e["wins_col"] = cell->wins_col;
      e["ties"] = cell->ties;
      e["n"] = cell->n_concepts;
      if (!cell->flag.empty()) e["flag"] = cell->flag;
      cells.push_back(std::move(e));
    }
  }
  j["cells"] = std::move(cells);
  return j;
}

std::string render_grid(const ComparisonMatrix& matrix) {
  std::size_t width = 1;
  for (const auto& m : matrix.models()) width = std::max(width, m.size());
  std::ostringstream out;
  out << std::string(width, ' ');
  for (const auto& m : matrix.models()) out << "  " << m;
  out << '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    const auto& name = matrix.models()[r];
    out << name << std::string(width - name.size(), ' ');
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      const auto& col = matrix.models()[c];
      const auto& cell = matrix.cell(r, c);
      const std::string symbol = cell ? std::string(to_symbol(cell->sign)) : "x";
      const std::size_t pad = col.size() > 1 ? col.size() - 1 : 0;
      out << "  " << std::string(pad / 2, ' ') << symbol << std::string(pad - pad / 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

namespace {

int sign_of(double x) { return (x > 0) - (x < 0); }

std::vector<std::string> model_names(const std::vector<AggregatedComparison>& comparisons) {
  std::set<std::string> names;
  for (const auto& c : comparisons) {
    names.insert(c.model_left.name);
    names.insert(c.model_right.name);
  }
  return {names.begin(), names.end()};
}

ComparisonMatrix rank_concept_level(const std::vector<AggregatedComparison>& per_concept,
                                    const std::vector<std::string>& models, double alpha_level) {
  struct Tally {
    int wins_a = 0, wins_b = 0, ties = 0;
  };
  // per_concept entries are oriented with model_left < model_right.
  std::map<std::pair<std::string, std::string>, Tally> tallies;
  for (const auto& c : per_concept) {
    auto& t = tallies[{c.model_left.name, c.model_right.name}];
    switch (c.verdict) {
      case Verdict::LeftMoreDiverse: ++t.wins_a; break;
      case Verdict::RightMoreDiverse: ++t.wins_b; break;
      default: ++t.ties; break;
    }
  }
  ComparisonMatrix matrix(models, "BinomialExact");
  for (std::size_t a = 0; a < models.size(); ++a) {
    for (std::size_t b = a + 1; b < models.size(); ++b) {
      const auto it = tallies.find({models[a], models[b]});
      const Tally t = it == tallies.end() ? Tally{} : it->second;
      ComparisonCell cell;
      cell.wins_row = t.wins_a;
      cell.wins_col = t.wins_b;
      cell.ties = t.ties;
      cell.n_concepts = t.wins_a + t.wins_b + t.ties;
      const int decisive = t.wins_a + t.wins_b;
      if (decisive == 0) {
        cell.flag = "NoDecisiveConcepts";
      } else {
        const auto test = binomial_two_sided(t.wins_a, decisive);
        const auto sig = significance_from_test(test, sign_of(t.wins_a - t.wins_b), alpha_level);
        cell.sign = sig.sign;
        cell.p_value = sig.p_value;
      }
      matrix.set_pair(a, b, cell);
    }
  }
  return matrix;
}

}  // namespace

ComparisonMatrix rank_human(const std::vector<AggregatedComparison>& aggregated, double alpha_level) {
  const auto per_concept = aggregate_per_concept(aggregated);
  return rank_concept_level(per_concept, model_names(per_concept), alpha_level);
}

std::string autorater_key(const ScoreRecord& record) {
  return record.embedder + "|" + std::string(to_string(record.conditioning.kind)) + "|" +
         record.conditioning.rendered_prompt.value_or("");
}

namespace {

using GridKey = std::pair<ConceptAttribute, int>;
using ScoreGrid = std::map<std::string, std::map<GridKey, double>>;

ScoreGrid build_grid(const std::vector<ScoreRecord>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no score records");
  const auto key = autorater_key(scores.front());
  ScoreGrid grid;
  for (const auto& s : scores) {
    if (autorater_key(s) != key) {
      throw Error(ErrorCode::SchemaError,
                  "scores mix autoraters '" + key + "' and '" + autorater_key(s) + "'");
    }
    if (!grid[s.model].emplace(GridKey{s.pair, s.replicate}, s.score).second) {
      throw Error(ErrorCode::SchemaError, "duplicate score for " + s.model + " " + s.pair.key() +
                                              " replicate " + std::to_string(s.replicate));
    }
  }
  const auto& reference = grid.begin()->second;
  for (const auto& [model, cells] : grid) {
    if (cells.size() != reference.size() ||
        !std::equal(cells.begin(), cells.end(), reference.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; })) {
      throw Error(ErrorCode::GridMismatch, "model '" + model + "' and '" + grid.begin()->first +
                                               "' were scored on different (pair, replicate) grids");
    }
  }
  return grid;
}

std::map<ConceptAttribute, double> concept_means(const std::map<GridKey, double>& cells) {
  std::map<ConceptAttribute, std::pair<double, int>> sums;
  for (const auto& [key, score] : cells) {
    auto& s = sums[key.first];
    s.first += score;
    ++s.second;
  }
  std::map<ConceptAttribute, double> means;
  for (const auto& [pair, s] : sums) means[pair] = s.first / s.second;
  return means;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ComparisonMatrix rank_auto(const std::vector<ScoreRecord>& scores, double alpha_level) {
  const auto grid = build_grid(scores);
  std::vector<std::string> models;
  std::vector<std::map<ConceptAttribute, double>> means;
  for (const auto& [model, cells] : grid) {
    models.push_back(model);
    means.push_back(concept_means(cells));
  }
  ComparisonMatrix matrix(models, "WilcoxonSignedRank");
  for (std::size_t a = 0; a < models.size(); ++a) {
    for (std::size_t b = a + 1; b < models.size(); ++b) {
      std::vector<double> diffs, nonzero;
      ComparisonCell cell;
      for (const auto& [pair, mean_a] : means[a]) {
        const double d = mean_a - means[b].at(pair);
        diffs.push_back(d);
        if (d > 0) ++cell.wins_row;
        else if (d < 0) ++cell.wins_col;
        else ++cell.ties;
        if (d != 0) nonzero.push_back(d);
      }
      cell.n_concepts = static_cast<int>(diffs.size());
      if (nonzero.empty()) {
        cell.flag = "AllZero";
      } else {
        const auto test = wilcoxon_signed_rank(diffs);
        int direction = sign_of(median(nonzero));
        if (direction == 0) {
          const double m = test.n_effective;
          direction = sign_of(test.statistic - m * (m + 1.0) / 4.0);
        }
        const auto sig = significance_from_test(test, direction, alpha_level);
        cell.sign = sig.sign;
        cell.p_value = sig.p_value;
      }
      matrix.set_pair(a, b, cell);
    }
  }
  return matrix;
}

WinRateMatrix win_rate_matrix(const std::vector<ScoreRecord>& scores) {
  const auto grid = build_grid(scores);
  WinRateMatrix out;
  std::vector<const std::map<GridKey, double>*> cells;
  for (const auto& [model, c] : grid) {
    out.models.push_back(model);
    cells.push_back(&c);
  }
  const auto m = out.models.size();
  out.rates.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      long long wins_a = 0, wins_b = 0, total = 0;
      for (const auto& [key, score_a] : *cells[a]) {
        const double score_b = cells[b]->at(key);
        wins_a += score_a > score_b;
        wins_b += score_b > score_a;
        ++total;
      }
      const double rate = static_cast<double>(wins_a - wins_b) / (2.0 * static_cast<double>(total));
      out.rates[a][b] = rate;
      out.rates[b][a] = -rate;
    }
  }
  return out;
}

Json to_json(const WinRateMatrix& matrix) {
  Json j;
  j["models"] = matrix.models;
  Json rows = Json::array();
  for (const auto& row : matrix.rates) {
    Json r = Json::array();
    for (double v : row) r.push_back(round_sig12(v));
    rows.push_back(std::move(r));
  }
  j["rates"] = std::move(rows);
  return j;
}

AblationReport sufficiency_ablation(const std::vector<AggregatedComparison>& aggregated,
                                    const std::vector<int>& sizes, std::uint64_t seed,
                                    double alpha_level) {
  const auto per_concept = aggregate_per_concept(aggregated);
  const auto models = model_names(per_concept);
  std::set<ConceptAttribute> concept_set;
  for (const auto& c : per_concept) concept_set.insert(c.pair);
  std::vector<ConceptAttribute> concepts(concept_set.begin(), concept_set.end());

  for (int size : sizes) {
    if (size < 1) throw Error(ErrorCode::BadInput, "ablation sizes must be >= 1");
    if (static_cast<std::size_t>(size) > concepts.size()) {
      throw Error(ErrorCode::SizeTooLarge, "size " + std::to_string(size) + " exceeds the " +
                                               std::to_string(concepts.size()) + " available concepts");
    }
  }

  AblationReport report;
  report.seed = seed;
  report.full = rank_concept_level(per_concept, models, alpha_level);

  std::mt19937_64 rng(seed);
  std::shuffle(concepts.begin(), concepts.end(), rng);
  for (int size : sizes) {
    AblationStep step;
    step.size = size;
    step.concepts.assign(concepts.begin(), concepts.begin() + size);
    std::sort(step.concepts.begin(), step.concepts.end());
    std::vector<AggregatedComparison> kept;
    for (const auto& c : per_concept) {
      if (std::binary_search(step.concepts.begin(), step.concepts.end(), c.pair)) kept.push_back(c);
    }
    step.matrix = rank_concept_level(kept, models, alpha_level);
    report.steps.push_back(std::move(step));
  }
  return report;
}

Json to_json(const AblationReport& report) {
  Json j;
  j["seed"] = report.seed;
  j["models"] = report.full.models();
  Json sizes = Json::array();
  for (const auto& step : report.steps) sizes.push_back(step.size);
  j["sizes"] = std::move(sizes);
  j["full"] = to_json(report.full);

  Json steps = Json::array();
  for (const auto& step : report.steps) {
    Json s;
    s["size"] = step.size;
    Json concepts = Json::array();
    for (const auto& c : step.concepts) concepts.push_back(c.key());
    s["concepts"] = std::move(concepts);
    s["matrix"] = to_json(step.matrix);
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);

  Json sequences = Json::array();
  int contradictions = 0;
  const auto n = report.full.size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      std::string signs(to_symbol(report.full.cell(r, c)->sign));
      for (const auto& step : report.steps) signs += to_symbol(step.matrix.cell(r, c)->sign);
      const bool flips = signs.find('>') != std::string::npos && signs.find('<') != std::string::npos;
      contradictions += flips;
      Json e;
      e["row"] = report.full.models()[r];
      e["col"] = report.full.models()[c];
      e["signs"] = signs;
      e["contradiction"] = flips;
      sequences.push_back(std::move(e));
    }
  }
  j["sequences"] = std::move(sequences);
  j["contradictions"] = contradictions;
  return j;
}

}  // namespace divbench
