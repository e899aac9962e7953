#pragma once

#include <cstdint>

#include "divbench/json_io.hpp"

namespace divbench {

/// Protocol defaults: 8 images per set, 5 raters per comparison,
/// 10 replicate sets per (model, pair), tests at the 0.05 level.
struct RunConfig {
  double alpha_level = 0.05;
  int set_size = kDefaultSetSize;
  int raters_per_task = 5;
  int replicates = 10;
  std::uint64_t seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws BadInput unless alpha_level lies in (0, 1) and the counts are positive.
void validate(const RunConfig& config);

Json to_json(const RunConfig& config);
/// Missing fields keep their defaults.
RunConfig run_config_from_json(const Json& j);

}  // namespace divbench
