#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "divbench/domain.hpp"

namespace divbench {

/// Field order is preserved on output, which keeps every report diff-able.
using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so that serialized reals are stable.
double round_sig12(double value);

Json to_json(const ConceptAttribute& pair);
ConceptAttribute pair_from_json(const Json& j);

Json to_json(const SetRef& ref);
SetRef set_ref_from_json(const Json& j);

/// Typed field access that reports missing or mistyped fields as SchemaError.
const Json& require(const Json& j, const char* field);
std::string require_string(const Json& j, const char* field);
long long require_int(const Json& j, const char* field);
double require_number(const Json& j, const char* field);
bool require_bool(const Json& j, const char* field);

Json parse_json(const std::string& text, const std::string& context);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Invokes `on_record` for each non-blank line; `line_no` is 1-based.
void for_each_jsonl(std::istream& in, const std::string& context,
                    const std::function<void(const Json&, std::size_t line_no)>& on_record);
void for_each_jsonl_file(const std::filesystem::path& path,
                         const std::function<void(const Json&, std::size_t line_no)>& on_record);

std::string dump_jsonl(const std::vector<Json>& records);

}  // namespace divbench
