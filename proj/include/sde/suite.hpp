// Aligned prompt-suite asset: families of nine records covering the Surface,
// Structural, and Conditional views plus one meta-principle prompt.
//
// Loading is purely syntactic; validate_suite reports every invariant
// violation as a finding, and lint_structural_projection checks the
// projection discipline of Structural records.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sde/error.hpp"

namespace sde {

enum class Layer { Surface, Structural, Conditional, Meta };
enum class Variant { Support, Counter };
enum class Side { A, B, None };
enum class SuiteKind { Full32, Controversial20, Subset };

const char* to_string(Layer layer);
const char* to_string(Variant variant);
const char* to_string(Side side);
const char* to_string(SuiteKind kind);

Layer layer_from_string(const std::string& s);          // throws EnumError
Variant variant_from_string(const std::string& s);      // throws EnumError
Side side_from_string(const std::string& s);            // throws EnumError
SuiteKind suite_kind_from_string(const std::string& s); // throws EnumError

struct Condition {
  std::string axis_id;
  std::string statement;
  std::string registry_item_id;  // optional, empty when absent
  std::string source_anchor;     // optional, empty when absent
};

struct PromptRecord {
  std::string prompt_id;
  std::string family_id;
  Layer layer = Layer::Surface;
  std::optional<Variant> variant;
  Side side = Side::A;
  std::string text;
  std::vector<Condition> conditions;     // Structural and Conditional only
  std::vector<std::string> group_labels; // Surface and Conditional only
};

struct Family {
  std::string family_id;  // slug form: phenomenon__axis_groupA_groupB
  std::string phenomenon;
  std::string axis;
  std::string domain_tag;
  std::vector<PromptRecord> records;  // exactly nine when valid

  // nullptr when the cell is absent or duplicated.
  const PromptRecord* find(Layer layer, std::optional<Variant> variant,
                           Side side) const;
};

struct Suite {
  std::string suite_id;
  SuiteKind kind = SuiteKind::Subset;
  std::string version;
  std::vector<Family> families;

  int prompt_count() const;
  const Family* find_family(const std::string& family_id) const;
};

// Parses a suite document. Syntactic checks only: field presence and value
// shape. Semantic rules live in validate_suite.
Suite load_suite(const std::string& path);
Suite parse_suite(const std::string& text, const std::string& origin);

std::string serialize_suite(const Suite& suite);
void save_suite(const Suite& suite, const std::string& path);

// Reports every violation of the suite/family/record invariants. Pure; never
// throws on bad content.
ValidationReport validate_suite(const Suite& suite);

struct LintOptions {
  // A Structural condition statement matching digits followed by one of these
  // unit tokens counts as case-specific evidence.
  std::vector<std::string> evidence_units = {
      "%", "percent", "percentage points", "points", "minutes", "hours",
      "days", "weeks", "months", "years", "times", "cases", "incidents",
      "dollars", "respondents"};
};

// Projection lint for one family: no concrete group names in the Structural
// layer, one condition per axis, no case-specific evidence.
std::vector<Finding> lint_structural_projection(const Family& family,
                                                const LintOptions& options = {});

// Canonical record ordering used by runs and verdict sets:
// (family_id, layer, variant, side).
bool record_order_less(const PromptRecord& lhs, const PromptRecord& rhs);

}  // namespace sde
