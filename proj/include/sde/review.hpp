// Second-reader case-review records and their consolidation into the three
// review classes (broad support, boundary disagreement, matrix-level).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sde/suite.hpp"

namespace sde {

enum class AsymmetryFound { Yes, No, NonRowWise, Difficult };
enum class Confidence { Low, Medium, High };
enum class Relation {
  Agree,
  BroadlySupported,
  Disagreement,
  HardDisagreement,
  PartialObjectSupport,
  ScoreObjectDisagreement,
  AgreeNonRowWise,
};
enum class ReviewClass { BroadSupport, BoundaryDisagreement, MatrixLevel };

const char* to_string(AsymmetryFound v);
const char* to_string(Confidence v);
const char* to_string(Relation v);
const char* to_string(ReviewClass v);

// One blind reading. Unrecognized enum spellings survive loading in the
// *_raw fields so the validator can report them as findings.
struct Reading {
  std::optional<AsymmetryFound> asymmetry_found;
  std::string asymmetry_found_raw;
  std::optional<Confidence> confidence;  // required when found is Yes or No
  std::string confidence_raw;
  std::string object_note;
};

struct LayerRef {
  Layer layer = Layer::Surface;
  std::optional<Variant> variant;
  std::string pattern_tag;  // e.g. "withdrawal", "convergence"
};

struct ReviewUnit {
  std::string unit_id;  // two-digit, "01".."20" in the shipped record
  std::string family_ref;
  LayerRef layer_ref;
  Reading primary_reading;
  Reading second_reading;
  std::optional<Relation> relation;
  std::string relation_raw;
  std::string note;
};

struct ConsolidationSummary {
  int broad_support = 0;
  int boundary_disagreement = 0;
  int matrix_level = 0;
  std::vector<std::pair<std::string, ReviewClass>> per_unit;

  int total() const {
    return broad_support + boundary_disagreement + matrix_level;
  }
};

std::vector<ReviewUnit> load_review(const std::string& path);
std::vector<ReviewUnit> parse_review(const std::string& text,
                                     const std::string& origin);
std::string serialize_review(const std::vector<ReviewUnit>& units);

// Findings for duplicate unit ids, unknown enum spellings, and missing
// confidence where the reading requires one.
ValidationReport validate_review(const std::vector<ReviewUnit>& units);

// Total over the relation enum:
//   Agree, BroadlySupported                                  -> BroadSupport
//   Disagreement, HardDisagreement                           -> BoundaryDisagreement
//   PartialObjectSupport, ScoreObjectDisagreement,
//   AgreeNonRowWise                                          -> MatrixLevel
ReviewClass review_class_for(Relation relation);

// Throws INVALID_UNITS when validate_review fails.
ConsolidationSummary consolidate(const std::vector<ReviewUnit>& units);

// Flags units referencing unknown families or unreviewable layers.
std::vector<Finding> review_coverage(const std::vector<ReviewUnit>& units,
                                     const Suite& suite);

std::string serialize_consolidation(const ConsolidationSummary& summary);
ConsolidationSummary load_consolidation(const std::string& path);

}  // namespace sde
