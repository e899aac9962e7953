#include "divbench/annotations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "divbench/errors.hpp"
#include "divbench/stats.hpp"

namespace divbench {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::LeftMoreDiverse: return "LeftMoreDiverse";
    case Verdict::RightMoreDiverse: return "RightMoreDiverse";
    case Verdict::EquallyDiverse: return "EquallyDiverse";
    case Verdict::UnableToAnswer: return "UnableToAnswer";
  }
  return "UnableToAnswer";
}

Verdict verdict_from_string(std::string_view text) {
  for (auto v : {Verdict::LeftMoreDiverse, Verdict::RightMoreDiverse, Verdict::EquallyDiverse,
                 Verdict::UnableToAnswer}) {
    if (text == to_string(v)) return v;
  }
  throw Error(ErrorCode::SchemaError, "unknown verdict '" + std::string(text) + "'");
}

Verdict mirror(Verdict v) {
  switch (v) {
    case Verdict::LeftMoreDiverse: return Verdict::RightMoreDiverse;
    case Verdict::RightMoreDiverse: return Verdict::LeftMoreDiverse;
    default: return v;
  }
}

int RatingRecord::set_size() const {
  const auto n = std::max(set_left.size(), set_right.size());
  return n == 0 ? kDefaultSetSize : static_cast<int>(n);
}

void validate(const RatingRecord& r) {
  if (r.task_id.empty()) throw Error(ErrorCode::SchemaError, "empty task_id");
  if (r.rater_id.empty()) throw Error(ErrorCode::SchemaError, "empty rater_id");
  if (r.model_left.name.empty() || r.model_right.name.empty()) {
    throw Error(ErrorCode::SchemaError, "empty model name");
  }
  if (r.elapsed_ms < 0) throw Error(ErrorCode::SchemaError, "elapsed_ms must be >= 0");
  if (r.count_left.has_value() != r.count_right.has_value()) {
    throw Error(ErrorCode::SchemaError, "counts must be given for both sides or neither");
  }
  const int limit = r.set_size();
  for (const auto& c : {r.count_left, r.count_right}) {
    if (c && (*c < 1 || *c > limit)) {
      throw Error(ErrorCode::OutOfRange,
                  "count " + std::to_string(*c) + " outside [1, " + std::to_string(limit) + "]");
    }
  }
}

RatingRecord to_canonical(RatingRecord record) {
  if (!record.displayed_swap) return record;
  std::swap(record.count_left, record.count_right);
  record.verdict = mirror(record.verdict);
  record.displayed_swap = false;
  return record;
}

Json to_json(const RatingRecord& r) {
  Json j;
  j["task_id"] = r.task_id;
  j["study_id"] = r.study_id;
  j["pair"] = to_json(r.pair);
  j["model_left"] = r.model_left.name;
  j["model_right"] = r.model_right.name;
  j["set_left"] = to_json(r.set_left);
  j["set_right"] = to_json(r.set_right);
  j["rater_id"] = r.rater_id;
  j["count_left"] = r.count_left ? Json(*r.count_left) : Json(nullptr);
  j["count_right"] = r.count_right ? Json(*r.count_right) : Json(nullptr);
  j["verdict"] = std::string(to_string(r.verdict));
  j["elapsed_ms"] = r.elapsed_ms;
  j["displayed_swap"] = r.displayed_swap;
  return j;
}

namespace {

std::optional<int> optional_count(const Json& j, const char* field) {
  if (!j.contains(field) || j[field].is_null()) return std::nullopt;
  return static_cast<int>(require_int(j, field));
}

}  // namespace

RatingRecord rating_record_from_json(const Json& j) {
  RatingRecord r;
  r.task_id = require_string(j, "task_id");
  r.study_id = j.contains("study_id") && j["study_id"].is_string() ? j["study_id"].get<std::string>()
                                                                   : std::string{};
  r.pair = pair_from_json(require(j, "pair"));
  r.model_left.name = require_string(j, "model_left");
  r.model_right.name = require_string(j, "model_right");
  r.set_left = set_ref_from_json(require(j, "set_left"));
  r.set_right = set_ref_from_json(require(j, "set_right"));
  r.set_left.pair = r.pair;
  r.set_right.pair = r.pair;
  r.rater_id = require_string(j, "rater_id");
  r.count_left = optional_count(j, "count_left");
  r.count_right = optional_count(j, "count_right");
  r.verdict = verdict_from_string(require_string(j, "verdict"));
  r.elapsed_ms = j.contains("elapsed_ms") ? require_int(j, "elapsed_ms") : 0;
  r.displayed_swap = j.contains("displayed_swap") ? require_bool(j, "displayed_swap") : false;
  validate(r);
  return r;
}

std::vector<RatingRecord> read_rating_records(std::istream& in, const std::string& context) {
  std::vector<RatingRecord> out;
  for_each_jsonl(in, context, [&](const Json& j, std::size_t line_no) {
    if (j.is_object() && j.contains("trailer")) return;
    try {
      out.push_back(rating_record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), context + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

std::vector<RatingRecord> read_rating_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_rating_records(in, path.string());
}

void write_rating_records(const std::vector<RatingRecord>& records,
                          const std::filesystem::path& path) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_text_file(path, dump_jsonl(lines));
}

Verdict infer_verdict_from_counts(int count_left, int count_right, int set_size) {
  for (int c : {count_left, count_right}) {
    if (c < 1 || c > set_size) {
      throw Error(ErrorCode::OutOfRange,
                  "count " + std::to_string(c) + " outside [1, " + std::to_string(set_size) + "]");
    }
  }
  if (count_left > count_right) return Verdict::LeftMoreDiverse;
  if (count_right > count_left) return Verdict::RightMoreDiverse;
  return Verdict::EquallyDiverse;
}

Verdict mode_verdict(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::EmptyInput, "no verdicts to aggregate");
  std::array<int, kVerdictCount> counts{};
  for (auto v : verdicts) ++counts[static_cast<int>(v)];
  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<Verdict> tied;
  for (int i = 0; i < kVerdictCount; ++i) {
    if (counts[i] == top) tied.push_back(static_cast<Verdict>(i));
  }
  if (tied.size() > 1) {
    std::erase(tied, Verdict::UnableToAnswer);
  }
  if (tied.size() == 1) return tied.front();
  return Verdict::EquallyDiverse;
}

namespace {

std::optional<int> mode_smallest(const std::vector<int>& values) {
  if (values.empty()) return std::nullopt;
  std::map<int, int> freq;
  for (int v : values) ++freq[v];
  int best = freq.begin()->first, best_count = 0;
  for (const auto& [value, count] : freq) {
    if (count > best_count) {  // ascending keys: the first maximum is the smallest
      best = value;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

AggregatedComparison aggregate_mode(const std::vector<RatingRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no ratings for task");
  const auto& first = records.front();
  std::vector<Verdict> verdicts;
  std::vector<int> maxima, gaps;
  std::set<std::string> raters;
  for (const auto& raw : records) {
    if (raw.task_id != first.task_id) {
      throw Error(ErrorCode::SchemaError, "records from tasks '" + first.task_id + "' and '" +
                                              raw.task_id + "' mixed in one aggregation");
    }
    if (!raters.insert(raw.rater_id).second) {
      throw Error(ErrorCode::SchemaError,
                  "rater '" + raw.rater_id + "' rated task '" + raw.task_id + "' twice");
    }
    const auto r = to_canonical(raw);
    verdicts.push_back(r.verdict);
    if (r.has_counts()) {
      maxima.push_back(std::max(*r.count_left, *r.count_right));
      gaps.push_back(std::abs(*r.count_left - *r.count_right));
    }
  }
  AggregatedComparison out;
  out.pair = first.pair;
  out.model_left = first.model_left;
  out.model_right = first.model_right;
  out.replicate = first.set_left.replicate;
  out.replicate_right = first.set_right.replicate;
  out.verdict = mode_verdict(verdicts);
  out.n_ratings = static_cast<int>(records.size());
  out.modal_count = mode_smallest(maxima);
  out.modal_count_gap = mode_smallest(gaps);
  return out;
}

std::vector<AggregatedComparison> aggregate_tasks(const std::vector<RatingRecord>& records) {
  std::map<std::string, std::vector<RatingRecord>> by_task;
  for (const auto& r : records) by_task[r.task_id].push_back(r);
  std::vector<AggregatedComparison> out;
  out.reserve(by_task.size());
  for (const auto& [task, group] : by_task) out.push_back(aggregate_mode(group));
  return out;
}

std::vector<AggregatedComparison> aggregate_per_concept(
    const std::vector<AggregatedComparison>& comparisons) {
  using Key = std::tuple<ConceptAttribute, std::string, std::string>;
  struct Bucket {
    std::vector<Verdict> verdicts;
    std::vector<int> modal_counts, modal_gaps;
    int n_ratings = 0;
  };
  std::map<Key, Bucket> buckets;
  for (const auto& c : comparisons) {
    if (c.model_left == c.model_right) {
      throw Error(ErrorCode::SchemaError, "comparison of model '" + c.model_left.name + "' with itself");
    }
    const bool flip = c.model_right < c.model_left;
    const auto& a = flip ? c.model_right : c.model_left;
    const auto& b = flip ? c.model_left : c.model_right;
    auto& bucket = buckets[Key{c.pair, a.name, b.name}];
    bucket.verdicts.push_back(flip ? mirror(c.verdict) : c.verdict);
    if (c.modal_count) bucket.modal_counts.push_back(*c.modal_count);
    if (c.modal_count_gap) bucket.modal_gaps.push_back(*c.modal_count_gap);
    bucket.n_ratings += c.n_ratings;
  }
  std::vector<AggregatedComparison> out;
  out.reserve(buckets.size());
  for (const auto& [key, bucket] : buckets) {
    AggregatedComparison agg;
    agg.pair = std::get<0>(key);
    agg.model_left.name = std::get<1>(key);
    agg.model_right.name = std::get<2>(key);
    agg.replicate = -1;
    agg.replicate_right = -1;
    agg.verdict = mode_verdict(bucket.verdicts);
    agg.n_ratings = bucket.n_ratings;
    agg.modal_count = mode_smallest(bucket.modal_counts);
    agg.modal_count_gap = mode_smallest(bucket.modal_gaps);
    out.push_back(std::move(agg));
  }
  return out;
}

AgreementReport krippendorff_alpha_nominal(const std::vector<std::vector<int>>& units,
                                           int n_categories) {
  if (n_categories < 1) throw Error(ErrorCode::BadInput, "need at least one category");

  // Everything is accumulated from label-free integers (pair counts and sums
  // of squares), so any relabeling of the categories gives the same bits.
  // Off-diagonal coincidences of a unit: (m^2 - sum_c n_uc^2) / (m - 1).
  std::vector<long long> marginal(static_cast<std::size_t>(n_categories), 0);
  double observed = 0.0;
  int pairable = 0;
  for (const auto& values : units) {
    const auto m = static_cast<long long>(values.size());
    if (m < 2) continue;
    ++pairable;
    std::vector<long long> counts(static_cast<std::size_t>(n_categories), 0);
    for (int v : values) {
      if (v < 0 || v >= n_categories) throw Error(ErrorCode::BadInput, "category out of range");
      ++counts[static_cast<std::size_t>(v)];
      ++marginal[static_cast<std::size_t>(v)];
    }
    long long same = 0;
    for (long long c : counts) same += c * c;
    observed += static_cast<double>(m * m - same) / static_cast<double>(m - 1);
  }
  if (pairable < 2) {
    throw Error(ErrorCode::InsufficientData,
                "need at least two units with two or more ratings, found " + std::to_string(pairable));
  }

  long long n_total = 0, marginal_squares = 0;
  for (long long c : marginal) {
    n_total += c;
    marginal_squares += c * c;
  }
  const long long expected = n_total * n_total - marginal_squares;  // sum over c != k of n_c n_k

  AgreementReport report;
  report.n_units = pairable;
  if (expected == 0) {
    report.alpha = 1.0;
    report.zero_expected_disagreement = true;
    return report;
  }
  // alpha = 1 - D_o / D_e with D_o = observed / n and D_e = expected / (n (n - 1)).
  report.alpha = 1.0 - static_cast<double>(n_total - 1) * observed / static_cast<double>(expected);
  return report;
}

AgreementReport krippendorff_alpha(const std::vector<RatingRecord>& records) {
  std::map<std::string, std::vector<int>> units;
  std::set<std::string> raters;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& raw : records) {
    if (!seen.emplace(raw.task_id, raw.rater_id).second) {
      throw Error(ErrorCode::SchemaError,
                  "rater '" + raw.rater_id + "' rated task '" + raw.task_id + "' twice");
    }
    units[raw.task_id].push_back(static_cast<int>(to_canonical(raw).verdict));
  }
  std::vector<std::vector<int>> table;
  table.reserve(units.size());
  for (const auto& [task, values] : units) table.push_back(values);
  auto report = krippendorff_alpha_nominal(table, kVerdictCount);
  // Only raters who contributed to a pairable unit count.
  for (const auto& r : records) {
    if (units[r.task_id].size() >= 2) raters.insert(r.rater_id);
  }
  report.n_raters = static_cast<int>(raters.size());
  return report;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

CorrelationReport spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::BadInput, "correlation inputs differ in length");
  const int n = static_cast<int>(x.size());
  if (n < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least two observations, got " + std::to_string(n));
  }
  if (is_constant(x) || is_constant(y)) {
    throw Error(ErrorCode::ConstantInput, "correlation undefined for a constant input");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  CorrelationReport report;
  report.n = n;
  report.rho = pearson(rx, ry);

  if (n <= 10) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> permuted(n);
    long long extreme = 0, total = 0;
    const double observed = std::abs(report.rho) - 1e-12;
    do {
      for (int i = 0; i < n; ++i) permuted[i] = ry[perm[i]];
      if (std::abs(pearson(rx, permuted)) >= observed) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    report.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    report.exact_p = true;
    return report;
  }

  const double df = n - 2.0;
  const double r2 = report.rho * report.rho;
  if (r2 >= 1.0) {
    report.p_value = 0.0;
    return report;
  }
  const double t = std::abs(report.rho) * std::sqrt(df / (1.0 - r2));
  boost::math::students_t dist(df);
  report.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  return report;
}

CorrelationReport count_verdict_correlation(const std::vector<RatingRecord>& records) {
  std::vector<double> diffs, coded;
  for (const auto& raw : records) {
    const auto r = to_canonical(raw);
    if (r.verdict == Verdict::UnableToAnswer || !r.has_counts()) continue;
    diffs.push_back(*r.count_left - *r.count_right);
    coded.push_back(r.verdict == Verdict::LeftMoreDiverse    ? 1.0
                    : r.verdict == Verdict::RightMoreDiverse ? -1.0
                                                             : 0.0);
  }
  return spearman_correlation(diffs, coded);
}

Json to_json(const AgreementReport& report) {
  Json j;
  j["alpha"] = round_sig12(report.alpha);
  j["level"] = "nominal";
  j["n_units"] = report.n_units;
  j["n_raters"] = report.n_raters;
  if (report.zero_expected_disagreement) j["flag"] = "ZeroExpectedDisagreement";
  return j;
}

Json to_json(const CorrelationReport& report) {
  Json j;
  j["rho"] = round_sig12(report.rho);
  j["p"] = round_sig12(report.p_value);
  j["n"] = report.n;
  j["p_method"] = report.exact_p ? "exact_permutation" : "t_approximation";
  return j;
}

}  // namespace divbench
