#include "divbench/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "divbench/errors.hpp"

namespace divbench {

double round_sig12(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return std::strtod(buf, nullptr);
}

Json to_json(const ConceptAttribute& pair) {
  Json j;
  j["concept"] = pair.concept_name();
  j["attribute"] = pair.attribute();
  j["category"] = std::string(to_string(pair.category()));
  j["prompt_text"] = pair.prompt_text();
  return j;
}

ConceptAttribute pair_from_json(const Json& j) {
  auto category = Category::Other;
  if (j.contains("category") && j["category"].is_string()) {
    category = category_from_string(j["category"].get<std::string>());
  }
  std::string prompt;
  if (j.contains("prompt_text") && j["prompt_text"].is_string()) {
    prompt = j["prompt_text"].get<std::string>();
  }
  return ConceptAttribute(require_string(j, "concept"), require_string(j, "attribute"), category,
                          std::move(prompt));
}

Json to_json(const SetRef& ref) {
  Json j;
  j["model"] = ref.model.name;
  j["concept"] = ref.pair.concept_name();
  j["attribute"] = ref.pair.attribute();
  j["replicate"] = ref.replicate;
  j["image_ids"] = ref.image_ids;
  return j;
}

SetRef set_ref_from_json(const Json& j) {
  SetRef ref;
  ref.model.name = require_string(j, "model");
  ref.pair = ConceptAttribute(require_string(j, "concept"), require_string(j, "attribute"));
  ref.replicate = static_cast<int>(require_int(j, "replicate"));
  if (j.contains("image_ids")) {
    const auto& ids = j["image_ids"];
    if (!ids.is_array()) throw Error(ErrorCode::SchemaError, "image_ids must be an array");
    for (const auto& id : ids) {
      if (!id.is_string()) throw Error(ErrorCode::SchemaError, "image_ids must hold strings");
      ref.image_ids.push_back(id.get<std::string>());
    }
  }
  validate(ref);
  return ref;
}

const Json& require(const Json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw Error(ErrorCode::SchemaError, std::string("missing field '") + field + "'");
  }
  return j[field];
}

std::string require_string(const Json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) throw Error(ErrorCode::SchemaError, std::string(field) + " must be a string");
  return v.get<std::string>();
}

long long require_int(const Json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::SchemaError, std::string(field) + " must be an integer");
  }
  return v.get<long long>();
}

double require_number(const Json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, std::string(field) + " must be a number");
  return v.get<double>();
}

bool require_bool(const Json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_boolean()) throw Error(ErrorCode::SchemaError, std::string(field) + " must be a boolean");
  return v.get<bool>();
}

Json parse_json(const std::string& text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, context + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void for_each_jsonl(std::istream& in, const std::string& context,
                    const std::function<void(const Json&, std::size_t)>& on_record) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    on_record(parse_json(line, context + ":" + std::to_string(line_no)), line_no);
  }
}

void for_each_jsonl_file(const std::filesystem::path& path,
                         const std::function<void(const Json&, std::size_t)>& on_record) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  for_each_jsonl(in, path.string(), on_record);
}

std::string dump_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace divbench
