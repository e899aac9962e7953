#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "divbench/annotations.hpp"
#include "divbench/config.hpp"

namespace divbench {

/// Failure carrying the HTTP status it maps to (400, 404, 409).
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

enum class TemplateVariant { Count, Aspect, WithoutAspect };

std::string_view to_string(TemplateVariant t);
TemplateVariant template_variant_from_string(std::string_view text);

struct StudyConfig {
  RunConfig run;
  TemplateVariant variant = TemplateVariant::Count;
  /// Present each (task, rater) with a seeded left/right swap.
  bool randomize_sides = true;
};

struct Task {
  std::string task_id;
  std::string study_id;
  ConceptAttribute pair;
  ModelId model_left;
  ModelId model_right;
  int replicate_left = 0;
  int replicate_right = 0;
  std::vector<std::string> left_images;
  std::vector<std::string> right_images;
};

enum class StudyStatus { Open, Closed };

struct Study {
  std::string study_id;
  StudyConfig config;
  std::vector<std::string> task_ids;
  StudyStatus status = StudyStatus::Open;
  std::string idempotency_key;
  std::string manifest;  // canonical dump of the creation body
};

struct CreateStudyResult {
  std::string study_id;
  bool created = false;  // false when an idempotent replay returned an existing study
};

/// Durable study state: an append-only JSONL event log (fsync'd before a
/// write is acknowledged) plus a periodic snapshot. All public methods are
/// safe to call concurrently; writes are serialized.
class StudyStore {
 public:
  explicit StudyStore(std::filesystem::path directory, int snapshot_every = 1000);
  ~StudyStore();

  StudyStore(const StudyStore&) = delete;
  StudyStore& operator=(const StudyStore&) = delete;

  CreateStudyResult create_study(const Json& body, const std::string& idempotency_key = {});

  /// Task payload as the rater sees it (sides already swapped, no model
  /// names), or empty when nothing is left for this rater.
  std::optional<Json> next_task(const std::string& study_id, const std::string& rater_id) const;

  RatingRecord submit_rating(const std::string& task_id, const Json& body);

  /// Canonical-frame JSONL sorted by (task_id, rater_id) with a trailing
  /// {"trailer": {...}} line.
  std::string export_study(const std::string& study_id) const;

  /// Stores canonical records of an existing study; returns how many were new.
  int import_records(const std::string& study_id, const std::vector<RatingRecord>& records);

  std::optional<Study> study(const std::string& study_id) const;
  std::vector<RatingRecord> ratings(const std::string& study_id) const;
  /// Whether the (task, rater) presentation is swapped.
  bool swap_flag(const std::string& task_id, const std::string& rater_id) const;

  void snapshot();

 private:
  struct State;

  void load();
  void replay_line(const std::string& line);
  void append_event(const Json& event);
  bool apply_rating(const RatingRecord& record);
  void maybe_snapshot();
  const Task& task_or_throw(const std::string& task_id) const;
  bool swap_flag_locked(const Task& task, const std::string& rater_id) const;

  std::filesystem::path directory_;
  int snapshot_every_;
  int fd_ = -1;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<State> state_;
};

/// HTTP front end for a StudyStore, plus static files under /static/.
class AnnotationServer {
 public:
  AnnotationServer(StudyStore& store, std::optional<std::filesystem::path> static_dir = {});
  ~AnnotationServer();

  /// Blocks serving until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace divbench
