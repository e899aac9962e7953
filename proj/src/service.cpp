#include "divbench/service.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <regex>

#include <httplib.h>

#include "divbench/errors.hpp"

namespace divbench {

namespace fs = std::filesystem;

std::string_view to_string(TemplateVariant t) {
  switch (t) {
    case TemplateVariant::Count: return "count";
    case TemplateVariant::Aspect: return "aspect";
    case TemplateVariant::WithoutAspect: return "no_aspect";
  }
  return "count";
}

TemplateVariant template_variant_from_string(std::string_view text) {
  if (text == "count") return TemplateVariant::Count;
  if (text == "aspect") return TemplateVariant::Aspect;
  if (text == "no_aspect") return TemplateVariant::WithoutAspect;
  throw Error(ErrorCode::SchemaError, "unknown template '" + std::string(text) + "'");
}

namespace {

constexpr const char* kLogFile = "events.jsonl";
constexpr const char* kSnapshotFile = "snapshot.json";

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_strings(std::uint64_t seed, std::string_view a, std::string_view b) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  feed(a);
  feed(b);
  return mix(seed ^ mix(h));
}

bool valid_identifier(const std::string& s) {
  return !s.empty() && s.size() <= 128 && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

Json to_json(const StudyConfig& c) {
  Json j = to_json(c.run);
  j["template"] = std::string(to_string(c.variant));
  j["randomize_sides"] = c.randomize_sides;
  return j;
}

StudyConfig study_config_from_json(const Json& j) {
  StudyConfig c;
  c.run = run_config_from_json(j);
  if (j.is_object() && j.contains("template")) {
    c.variant = template_variant_from_string(require_string(j, "template"));
  }
  if (j.is_object() && j.contains("randomize_sides")) c.randomize_sides = require_bool(j, "randomize_sides");
  return c;
}

Json to_json(const Task& t) {
  Json j;
  j["task_id"] = t.task_id;
  j["study_id"] = t.study_id;
  j["pair"] = to_json(t.pair);
  j["model_left"] = t.model_left.name;
  j["model_right"] = t.model_right.name;
  j["replicate_left"] = t.replicate_left;
  j["replicate_right"] = t.replicate_right;
  j["left_images"] = t.left_images;
  j["right_images"] = t.right_images;
  return j;
}

std::vector<std::string> string_list(const Json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, std::string(field) + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(ErrorCode::SchemaError, std::string(field) + " must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Task task_from_json(const Json& j) {
  Task t;
  t.task_id = require_string(j, "task_id");
  t.study_id = require_string(j, "study_id");
  t.pair = pair_from_json(require(j, "pair"));
  t.model_left.name = require_string(j, "model_left");
  t.model_right.name = require_string(j, "model_right");
  t.replicate_left = static_cast<int>(require_int(j, "replicate_left"));
  t.replicate_right = static_cast<int>(require_int(j, "replicate_right"));
  t.left_images = string_list(j, "left_images");
  t.right_images = string_list(j, "right_images");
  return t;
}

Json to_json(const Study& s, const std::map<std::string, Task>& tasks) {
  Json j;
  j["study_id"] = s.study_id;
  j["config"] = to_json(s.config);
  j["status"] = s.status == StudyStatus::Open ? "Open" : "Closed";
  j["idempotency_key"] = s.idempotency_key;
  j["manifest"] = s.manifest;
  Json list = Json::array();
  for (const auto& id : s.task_ids) list.push_back(to_json(tasks.at(id)));
  j["tasks"] = std::move(list);
  return j;
}

void write_all(int fd, const std::string& data) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::IoError, std::string("log write failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

}  // namespace

struct StudyStore::State {
  std::map<std::string, Study> studies;
  std::map<std::string, Task> tasks;
  std::map<std::string, std::string> study_by_key;
  // task_id -> rater_id -> record (display frame)
  std::map<std::string, std::map<std::string, RatingRecord>> ratings;
  std::uint64_t log_offset = 0;
  int ratings_since_snapshot = 0;

  void add_study(const Json& j) {
    Study s;
    s.study_id = require_string(j, "study_id");
    s.config = study_config_from_json(require(j, "config"));
    s.status = require_string(j, "status") == "Closed" ? StudyStatus::Closed : StudyStatus::Open;
    s.idempotency_key = require_string(j, "idempotency_key");
    s.manifest = require_string(j, "manifest");
    for (const auto& tj : require(j, "tasks")) {
      auto t = task_from_json(tj);
      s.task_ids.push_back(t.task_id);
      tasks[t.task_id] = std::move(t);
    }
    if (!s.idempotency_key.empty()) study_by_key[s.idempotency_key] = s.study_id;
    studies[s.study_id] = std::move(s);
  }
};

StudyStore::StudyStore(fs::path directory, int snapshot_every)
    : directory_(std::move(directory)),
      snapshot_every_(snapshot_every),
      state_(std::make_unique<State>()) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create store " + directory_.string());
  load();
}

StudyStore::~StudyStore() {
  if (fd_ >= 0) ::close(fd_);
}

void StudyStore::load() {
  const auto snapshot_path = directory_ / kSnapshotFile;
  if (fs::exists(snapshot_path)) {
    const auto snap = read_json_file(snapshot_path);
    for (const auto& s : require(snap, "studies")) state_->add_study(s);
    for (const auto& r : require(snap, "ratings")) apply_rating(rating_record_from_json(r));
    state_->log_offset = static_cast<std::uint64_t>(require_int(snap, "log_offset"));
  }

  const auto log_path = directory_ / kLogFile;
  std::uint64_t good = state_->log_offset;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(state_->log_offset));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      if (nl == std::string::npos) break;  // torn tail from an interrupted append
      replay_line(content.substr(pos, nl - pos));
      pos = nl + 1;
    }
    good += pos;
    if (fs::file_size(log_path) != good) fs::resize_file(log_path, good);
  }
  state_->log_offset = good;
  state_->ratings_since_snapshot = 0;

  fd_ = ::open(log_path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + log_path.string());
}

void StudyStore::replay_line(const std::string& line) {
  if (line.find_first_not_of(" \t\r") == std::string::npos) return;
  const auto event = parse_json(line, "event log");
  const auto kind = require_string(event, "event");
  if (kind == "study") {
    const auto& s = require(event, "study");
    if (!state_->studies.count(require_string(s, "study_id"))) state_->add_study(s);
  } else if (kind == "rating") {
    // Duplicates (task, rater) are dropped here, which keeps replay at-most-once.
    apply_rating(rating_record_from_json(require(event, "record")));
  } else {
    throw Error(ErrorCode::SchemaError, "unknown event '" + kind + "'");
  }
}

void StudyStore::append_event(const Json& event) {
  const std::string line = event.dump() + "\n";
  write_all(fd_, line);
  if (::fsync(fd_) != 0) throw Error(ErrorCode::IoError, "fsync of event log failed");
  state_->log_offset += line.size();
}

bool StudyStore::apply_rating(const RatingRecord& record) {
  auto task_it = state_->tasks.find(record.task_id);
  if (task_it == state_->tasks.end()) return false;
  const auto& study = state_->studies.at(task_it->second.study_id);
  auto& by_rater = state_->ratings[record.task_id];
  if (by_rater.count(record.rater_id) ||
      static_cast<int>(by_rater.size()) >= study.config.run.raters_per_task) {
    return false;
  }
  by_rater.emplace(record.rater_id, record);
  ++state_->ratings_since_snapshot;

  auto& s = state_->studies.at(task_it->second.study_id);
  const bool all_complete = std::all_of(s.task_ids.begin(), s.task_ids.end(), [&](const auto& id) {
    auto it = state_->ratings.find(id);
    return it != state_->ratings.end() &&
           static_cast<int>(it->second.size()) >= s.config.run.raters_per_task;
  });
  s.status = all_complete ? StudyStatus::Closed : StudyStatus::Open;
  return true;
}

void StudyStore::maybe_snapshot() {
  if (snapshot_every_ > 0 && state_->ratings_since_snapshot >= snapshot_every_) {
    Json snap;
    snap["log_offset"] = state_->log_offset;
    Json studies = Json::array();
    for (const auto& [id, s] : state_->studies) studies.push_back(to_json(s, state_->tasks));
    snap["studies"] = std::move(studies);
    Json ratings = Json::array();
    for (const auto& [task, by_rater] : state_->ratings) {
      for (const auto& [rater, r] : by_rater) ratings.push_back(to_json(r));
    }
    snap["ratings"] = std::move(ratings);

    const auto tmp = directory_ / (std::string(kSnapshotFile) + ".tmp");
    const std::string text = snap.dump();
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::IoError, "cannot write snapshot");
    write_all(fd, text);
    ::fsync(fd);
    ::close(fd);
    fs::rename(tmp, directory_ / kSnapshotFile);
    state_->ratings_since_snapshot = 0;
  }
}

void StudyStore::snapshot() {
  std::unique_lock lock(mutex_);
  const int saved = snapshot_every_;
  snapshot_every_ = 1;
  state_->ratings_since_snapshot = std::max(state_->ratings_since_snapshot, 1);
  maybe_snapshot();
  snapshot_every_ = saved;
}

CreateStudyResult StudyStore::create_study(const Json& body, const std::string& idempotency_key) {
  if (!body.is_object()) throw ServiceError(400, "study body must be a JSON object");
  std::string key = idempotency_key;
  if (key.empty() && body.contains("idempotency_key") && body["idempotency_key"].is_string()) {
    key = body["idempotency_key"].get<std::string>();
  }
  Json manifest = body;
  manifest.erase("idempotency_key");
  const std::string canonical = manifest.dump();

  std::unique_lock lock(mutex_);
  if (!key.empty()) {
    auto it = state_->study_by_key.find(key);
    if (it != state_->study_by_key.end()) {
      if (state_->studies.at(it->second).manifest == canonical) return {it->second, false};
      throw ServiceError(409, "idempotency key reused with a different body");
    }
  }

  Study study;
  study.study_id = "study-" + std::to_string(100000 + state_->studies.size() + 1).substr(1);
  study.idempotency_key = key;
  study.manifest = canonical;
  std::vector<Task> tasks;
  try {
    study.config = study_config_from_json(body.contains("config") ? body["config"] : Json());
    const auto& list = require(body, "tasks");
    if (!list.is_array() || list.empty()) throw Error(ErrorCode::SchemaError, "tasks must be a non-empty array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& tj = list[i];
      Task t;
      std::string local = tj.contains("task_id") ? require_string(tj, "task_id") : "t" + std::to_string(i);
      if (!valid_identifier(local)) throw Error(ErrorCode::SchemaError, "invalid task_id '" + local + "'");
      if (!seen.insert(local).second) throw Error(ErrorCode::SchemaError, "duplicate task_id '" + local + "'");
      t.task_id = study.study_id + "." + local;
      t.study_id = study.study_id;
      t.pair = pair_from_json(require(tj, "pair"));
      t.model_left.name = require_string(tj, "model_left");
      t.model_right.name = require_string(tj, "model_right");
      if (t.model_left.name.empty() || t.model_right.name.empty()) {
        throw Error(ErrorCode::SchemaError, "empty model name");
      }
      t.replicate_left = tj.contains("replicate_left") ? static_cast<int>(require_int(tj, "replicate_left")) : 0;
      t.replicate_right = tj.contains("replicate_right") ? static_cast<int>(require_int(tj, "replicate_right"))
                                                         : t.replicate_left;
      t.left_images = string_list(tj, "left_images");
      t.right_images = string_list(tj, "right_images");
      const auto size = static_cast<std::size_t>(study.config.run.set_size);
      if (t.left_images.size() != size || t.right_images.size() != size) {
        throw Error(ErrorCode::SchemaError, "task '" + local + "' needs " + std::to_string(size) +
                                                " images per side");
      }
      validate(SetRef{t.model_left, t.pair, t.replicate_left, t.left_images});
      validate(SetRef{t.model_right, t.pair, t.replicate_right, t.right_images});
      tasks.push_back(std::move(t));
    }
  } catch (const Error& e) {
    throw ServiceError(400, e.what());
  }

  std::map<std::string, Task> task_map;
  for (auto& t : tasks) {
    study.task_ids.push_back(t.task_id);
    task_map[t.task_id] = std::move(t);
  }
  Json event;
  event["event"] = "study";
  event["study"] = to_json(study, task_map);
  append_event(event);
  state_->add_study(event["study"]);
  return {study.study_id, true};
}

std::optional<Study> StudyStore::study(const std::string& study_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->studies.find(study_id);
  if (it == state_->studies.end()) return std::nullopt;
  return it->second;
}

const Task& StudyStore::task_or_throw(const std::string& task_id) const {
  auto it = state_->tasks.find(task_id);
  if (it == state_->tasks.end()) throw ServiceError(404, "unknown task '" + task_id + "'");
  return it->second;
}

bool StudyStore::swap_flag_locked(const Task& task, const std::string& rater_id) const {
  const auto& config = state_->studies.at(task.study_id).config;
  if (!config.randomize_sides) return false;
  return (hash_strings(config.run.seed ^ 0x5357415053494445ull, task.task_id, rater_id) & 1u) != 0;
}

bool StudyStore::swap_flag(const std::string& task_id, const std::string& rater_id) const {
  std::shared_lock lock(mutex_);
  return swap_flag_locked(task_or_throw(task_id), rater_id);
}

std::optional<Json> StudyStore::next_task(const std::string& study_id,
                                          const std::string& rater_id) const {
  if (rater_id.empty()) throw ServiceError(400, "rater_id is required");
  std::shared_lock lock(mutex_);
  auto sit = state_->studies.find(study_id);
  if (sit == state_->studies.end()) throw ServiceError(404, "unknown study '" + study_id + "'");
  const auto& study = sit->second;

  const Task* best = nullptr;
  std::uint64_t best_rank = std::numeric_limits<std::uint64_t>::max();
  for (const auto& id : study.task_ids) {
    auto rit = state_->ratings.find(id);
    if (rit != state_->ratings.end()) {
      if (static_cast<int>(rit->second.size()) >= study.config.run.raters_per_task) continue;
      if (rit->second.count(rater_id)) continue;
    }
    // Seeded per-rater shuffle: the smallest hash comes first.
    const auto rank = hash_strings(study.config.run.seed, rater_id, id);
    if (!best || rank < best_rank) {
      best = &state_->tasks.at(id);
      best_rank = rank;
    }
  }
  if (!best) return std::nullopt;

  const bool swapped = swap_flag_locked(*best, rater_id);
  Json view;
  view["task_id"] = best->task_id;
  view["study_id"] = best->study_id;
  view["concept"] = best->pair.concept_name();
  view["template"] = std::string(to_string(study.config.variant));
  if (study.config.variant != TemplateVariant::WithoutAspect) view["attribute"] = best->pair.attribute();
  view["prompt_text"] = best->pair.prompt_text();
  view["set_size"] = study.config.run.set_size;
  view["requires_counts"] = study.config.variant == TemplateVariant::Count;
  view["left_images"] = swapped ? best->right_images : best->left_images;
  view["right_images"] = swapped ? best->left_images : best->right_images;
  return view;
}

RatingRecord StudyStore::submit_rating(const std::string& task_id, const Json& body) {
  if (!body.is_object()) throw ServiceError(400, "rating body must be a JSON object");
  std::string rater_id;
  std::optional<int> count_left, count_right;
  Verdict verdict;
  long long elapsed = 0;
  try {
    rater_id = require_string(body, "rater_id");
    if (rater_id.empty()) throw Error(ErrorCode::SchemaError, "rater_id is empty");
    verdict = verdict_from_string(require_string(body, "verdict"));
    if (body.contains("count_left") && !body["count_left"].is_null()) {
      count_left = static_cast<int>(require_int(body, "count_left"));
    }
    if (body.contains("count_right") && !body["count_right"].is_null()) {
      count_right = static_cast<int>(require_int(body, "count_right"));
    }
    if (body.contains("elapsed_ms")) elapsed = require_int(body, "elapsed_ms");
    if (elapsed < 0) throw Error(ErrorCode::SchemaError, "elapsed_ms must be >= 0");
  } catch (const Error& e) {
    throw ServiceError(400, e.what());
  }

  std::unique_lock lock(mutex_);
  const Task& task = task_or_throw(task_id);
  const auto& study = state_->studies.at(task.study_id);
  const int set_size = study.config.run.set_size;
  if (study.config.variant == TemplateVariant::Count && !(count_left && count_right)) {
    throw ServiceError(400, "this study requires both counts");
  }
  if (count_left.has_value() != count_right.has_value()) {
    throw ServiceError(400, "counts must be given for both sides or neither");
  }
  for (const auto& c : {count_left, count_right}) {
    if (c && (*c < 1 || *c > set_size)) {
      throw ServiceError(400, "count " + std::to_string(*c) + " outside [1, " +
                                  std::to_string(set_size) + "]");
    }
  }
  auto rit = state_->ratings.find(task_id);
  if (rit != state_->ratings.end()) {
    if (rit->second.count(rater_id)) throw ServiceError(409, "rater already rated this task");
    if (static_cast<int>(rit->second.size()) >= study.config.run.raters_per_task) {
      throw ServiceError(409, "task already has all its ratings");
    }
  }

  RatingRecord record;
  record.task_id = task.task_id;
  record.study_id = task.study_id;
  record.pair = task.pair;
  record.model_left = task.model_left;
  record.model_right = task.model_right;
  record.set_left = {task.model_left, task.pair, task.replicate_left, task.left_images};
  record.set_right = {task.model_right, task.pair, task.replicate_right, task.right_images};
  record.rater_id = rater_id;
  record.count_left = count_left;
  record.count_right = count_right;
  record.verdict = verdict;
  record.elapsed_ms = elapsed;
  record.displayed_swap = swap_flag_locked(task, rater_id);

  Json event;
  event["event"] = "rating";
  event["record"] = to_json(record);
  append_event(event);
  apply_rating(record);
  maybe_snapshot();
  return record;
}

int StudyStore::import_records(const std::string& study_id, const std::vector<RatingRecord>& records) {
  std::unique_lock lock(mutex_);
  auto sit = state_->studies.find(study_id);
  if (sit == state_->studies.end()) throw ServiceError(404, "unknown study '" + study_id + "'");
  int added = 0;
  for (const auto& r : records) {
    const Task& task = task_or_throw(r.task_id);
    if (task.study_id != study_id) throw ServiceError(400, "task '" + r.task_id + "' is not in this study");
    if (!(r.model_left == task.model_left) || !(r.model_right == task.model_right)) {
      throw ServiceError(400, "record models differ from task '" + r.task_id + "'");
    }
    auto rit = state_->ratings.find(r.task_id);
    if (rit != state_->ratings.end() && rit->second.count(r.rater_id)) continue;
    Json event;
    event["event"] = "rating";
    event["record"] = to_json(r);
    if (!apply_rating(r)) throw ServiceError(409, "task '" + r.task_id + "' already has all its ratings");
    append_event(event);
    ++added;
  }
  maybe_snapshot();
  return added;
}

std::vector<RatingRecord> StudyStore::ratings(const std::string& study_id) const {
  std::shared_lock lock(mutex_);
  auto sit = state_->studies.find(study_id);
  if (sit == state_->studies.end()) throw ServiceError(404, "unknown study '" + study_id + "'");
  std::vector<RatingRecord> out;
  for (const auto& id : sit->second.task_ids) {
    auto rit = state_->ratings.find(id);
    if (rit == state_->ratings.end()) continue;
    for (const auto& [rater, r] : rit->second) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const RatingRecord& a, const RatingRecord& b) {
    return std::tie(a.task_id, a.rater_id) < std::tie(b.task_id, b.rater_id);
  });
  return out;
}

std::string StudyStore::export_study(const std::string& study_id) const {
  const auto records = ratings(study_id);
  std::string out;
  for (const auto& r : records) {
    out += to_json(to_canonical(r)).dump();
    out += '\n';
  }
  Json trailer;
  trailer["trailer"]["study_id"] = study_id;
  trailer["trailer"]["count"] = records.size();
  out += trailer.dump();
  out += '\n';
  return out;
}

struct AnnotationServer::Impl {
  StudyStore& store;
  httplib::Server server;

  explicit Impl(StudyStore& s) : store(s) {}
};

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  Json j;
  j["error"] = message;
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.what());
  } catch (const Error& e) {
    send_error(res, is_io_error(e.code()) ? 500 : 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

Json parse_body(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ServiceError(400, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

AnnotationServer::AnnotationServer(StudyStore& store, std::optional<fs::path> static_dir)
    : impl_(std::make_unique<Impl>(store)) {
  auto& svr = impl_->server;
  auto& st = impl_->store;

  svr.Post("/v1/studies", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto result = st.create_study(parse_body(req.body), req.get_header_value("Idempotency-Key"));
      Json j;
      j["study_id"] = result.study_id;
      res.status = result.created ? 201 : 200;
      res.set_content(j.dump(), "application/json");
    });
  });

  svr.Get(R"(/v1/studies/([^/]+)/tasks/next)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto task = st.next_task(req.matches[1], req.get_param_value("rater_id"));
      if (!task) {
        res.status = 204;
        return;
      }
      res.status = 200;
      res.set_content(task->dump(), "application/json");
    });
  });

  svr.Post(R"(/v1/tasks/([^/]+)/rating)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto record = st.submit_rating(req.matches[1], parse_body(req.body));
      Json j;
      j["task_id"] = record.task_id;
      j["rater_id"] = record.rater_id;
      res.status = 201;
      res.set_content(j.dump(), "application/json");
    });
  });

  svr.Get(R"(/v1/studies/([^/]+)/export)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(st.export_study(req.matches[1]), "application/x-ndjson");
    });
  });

  svr.Post(R"(/v1/studies/([^/]+)/import)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::istringstream in(req.body);
      std::vector<RatingRecord> records;
      try {
        records = read_rating_records(in, "import");
      } catch (const Error& e) {
        throw ServiceError(400, e.what());
      }
      Json j;
      j["imported"] = st.import_records(req.matches[1], records);
      res.status = 200;
      res.set_content(j.dump(), "application/json");
    });
  });

  svr.Get(R"(/v1/studies/([^/]+))", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto study = st.study(req.matches[1]);
      if (!study) throw ServiceError(404, "unknown study");
      Json j;
      j["study_id"] = study->study_id;
      j["status"] = study->status == StudyStatus::Open ? "Open" : "Closed";
      j["tasks"] = study->task_ids.size();
      j["ratings"] = st.ratings(study->study_id).size();
      res.status = 200;
      res.set_content(j.dump(), "application/json");
    });
  });

  if (static_dir) svr.set_mount_point("/static", static_dir->string());
}

AnnotationServer::~AnnotationServer() { stop(); }

bool AnnotationServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int AnnotationServer::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool AnnotationServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace divbench
