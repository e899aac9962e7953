#include "divbench/domain.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "divbench/errors.hpp"

namespace divbench {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::FoodAndDrink: return "FoodAndDrink";
    case Category::Nature: return "Nature";
    case Category::HumanMade: return "HumanMade";
    case Category::Other: return "Other";
  }
  return "Other";
}

Category category_from_string(std::string_view text) {
  if (text == "FoodAndDrink") return Category::FoodAndDrink;
  if (text == "Nature") return Category::Nature;
  if (text == "HumanMade") return Category::HumanMade;
  if (text == "Other" || text.empty()) return Category::Other;
  throw Error(ErrorCode::SchemaError, "unknown category '" + std::string(text) + "'");
}

std::string normalize_label(std::string_view text, bool case_fold) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  std::string out(text);
  if (case_fold) {
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return out;
}

ConceptAttribute::ConceptAttribute(std::string concept_name, std::string attribute,
                                   Category category, std::string prompt_text)
    : concept_(normalize_label(concept_name, false)),
      attribute_(normalize_label(attribute, false)),
      category_(category),
      prompt_text_(std::move(prompt_text)) {
  if (concept_.empty()) throw Error(ErrorCode::SchemaError, "concept must be non-empty");
  if (attribute_.empty()) throw Error(ErrorCode::SchemaError, "attribute must be non-empty");
}

std::string ConceptAttribute::key() const { return concept_ + "__" + attribute_; }

AttributeValueSpace::AttributeValueSpace(ConceptAttribute pair,
                                         const std::vector<std::string>& values)
    : pair_(std::move(pair)) {
  if (values.empty()) throw Error(ErrorCode::SchemaError, "value space must be non-empty");
  for (const auto& v : values) {
    auto norm = normalize_label(v);
    if (norm.empty()) throw Error(ErrorCode::SchemaError, "empty attribute value");
    if (!values_.insert(std::move(norm)).second) {
      throw Error(ErrorCode::SchemaError, "duplicate attribute value '" + v + "'");
    }
  }
}

void validate(const SetRef& ref) {
  if (ref.model.name.empty()) throw Error(ErrorCode::SchemaError, "empty model name");
  if (ref.replicate < 0) throw Error(ErrorCode::SchemaError, "negative replicate");
  std::unordered_set<std::string> seen;
  for (const auto& id : ref.image_ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::SchemaError, "duplicate image id '" + id + "'");
    }
  }
}

namespace {

std::size_t covered_values(const LabeledImageSet& set, const AttributeValueSpace& space) {
  if (!(set.pair == space.pair())) {
    throw Error(ErrorCode::MismatchedPair,
                set.pair.key() + " vs value space of " + space.pair().key());
  }
  std::set<std::string> covered;
  for (const auto& label : set.labels) {
    auto norm = normalize_label(label);
    if (space.values().count(norm)) covered.insert(std::move(norm));
  }
  return covered.size();
}

}  // namespace

bool is_perfectly_diverse(const LabeledImageSet& set, const AttributeValueSpace& space) {
  return covered_values(set, space) == space.values().size();
}

double coverage_fraction(const LabeledImageSet& set, const AttributeValueSpace& space) {
  return static_cast<double>(covered_values(set, space)) /
         static_cast<double>(space.values().size());
}

}  // namespace divbench
