#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace divbench {

enum class Category { FoodAndDrink, Nature, HumanMade, Other };

std::string_view to_string(Category category);
Category category_from_string(std::string_view text);

/// Trims ASCII whitespace and, optionally, lower-cases ASCII letters.
std::string normalize_label(std::string_view text, bool case_fold = true);

/// A (concept, attribute) pair, e.g. ("apple", "color"). Identity is the
/// (concept, attribute) key; category and prompt text are descriptive.
class ConceptAttribute {
 public:
  ConceptAttribute() = default;
  ConceptAttribute(std::string concept_name, std::string attribute,
                   Category category = Category::Other, std::string prompt_text = {});

  const std::string& concept_name() const noexcept { return concept_; }
  const std::string& attribute() const noexcept { return attribute_; }
  Category category() const noexcept { return category_; }
  const std::string& prompt_text() const noexcept { return prompt_text_; }

  /// "<concept>__<attribute>", the directory name used by the corpus layout.
  std::string key() const;

  friend bool operator==(const ConceptAttribute& a, const ConceptAttribute& b) {
    return a.concept_ == b.concept_ && a.attribute_ == b.attribute_;
  }
  friend std::strong_ordering operator<=>(const ConceptAttribute& a, const ConceptAttribute& b) {
    if (auto c = a.concept_ <=> b.concept_; c != 0) return c;
    return a.attribute_ <=> b.attribute_;
  }

 private:
  std::string concept_;
  std::string attribute_;
  Category category_ = Category::Other;
  std::string prompt_text_;
};

/// The finite set of values an attribute can take for one pair.
class AttributeValueSpace {
 public:
  AttributeValueSpace(ConceptAttribute pair, const std::vector<std::string>& values);

  const ConceptAttribute& pair() const noexcept { return pair_; }
  /// Normalized (trimmed, case-folded) values.
  const std::set<std::string>& values() const noexcept { return values_; }

 private:
  ConceptAttribute pair_;
  std::set<std::string> values_;
};

struct LabeledImageSet {
  ConceptAttribute pair;
  std::vector<std::string> labels;
};

struct ModelId {
  std::string name;

  friend bool operator==(const ModelId&, const ModelId&) = default;
  friend auto operator<=>(const ModelId&, const ModelId&) = default;
};

struct SetRef {
  ModelId model;
  ConceptAttribute pair;
  int replicate = 0;
  std::vector<std::string> image_ids;

  std::size_t size() const noexcept { return image_ids.size(); }

  friend bool operator==(const SetRef&, const SetRef&) = default;
};

/// Throws SchemaError when replicate is negative, ids repeat, or the model
/// name is empty.
void validate(const SetRef& ref);

inline constexpr int kDefaultSetSize = 8;

/// True iff every value of `space` occurs among the set's labels.
bool is_perfectly_diverse(const LabeledImageSet& set, const AttributeValueSpace& space);

/// Fraction of the value space covered by the set's labels.
double coverage_fraction(const LabeledImageSet& set, const AttributeValueSpace& space);

}  // namespace divbench
