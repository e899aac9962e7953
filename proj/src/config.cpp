#include "divbench/config.hpp"

#include "divbench/errors.hpp"

namespace divbench {

void validate(const RunConfig& config) {
  if (!(config.alpha_level > 0.0 && config.alpha_level < 1.0)) {
    throw Error(ErrorCode::BadInput, "alpha_level must lie in (0, 1)");
  }
  if (config.set_size < 1) throw Error(ErrorCode::BadInput, "set_size must be >= 1");
  if (config.raters_per_task < 1) throw Error(ErrorCode::BadInput, "raters_per_task must be >= 1");
  if (config.replicates < 1) throw Error(ErrorCode::BadInput, "replicates must be >= 1");
}

Json to_json(const RunConfig& config) {
  Json j;
  j["alpha_level"] = config.alpha_level;
  j["set_size"] = config.set_size;
  j["raters_per_task"] = config.raters_per_task;
  j["replicates"] = config.replicates;
  j["seed"] = config.seed;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "config must be an object");
  if (j.contains("alpha_level")) c.alpha_level = require_number(j, "alpha_level");
  if (j.contains("set_size")) c.set_size = static_cast<int>(require_int(j, "set_size"));
  if (j.contains("raters_per_task")) {
    c.raters_per_task = static_cast<int>(require_int(j, "raters_per_task"));
  }
  if (j.contains("replicates")) c.replicates = static_cast<int>(require_int(j, "replicates"));
  if (j.contains("seed")) {
    const auto& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw Error(ErrorCode::SchemaError, "seed must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  validate(c);
  return c;
}

}  // namespace divbench
