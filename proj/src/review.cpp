#include "sde/review.hpp"

#include <set>

#include <json.hpp>

#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

const char* to_string(AsymmetryFound v) {
  switch (v) {
    case AsymmetryFound::Yes: return "yes";
    case AsymmetryFound::No: return "no";
    case AsymmetryFound::NonRowWise: return "non_row_wise";
    case AsymmetryFound::Difficult: return "difficult";
  }
  return "?";
}

const char* to_string(Confidence v) {
  switch (v) {
    case Confidence::Low: return "low";
    case Confidence::Medium: return "medium";
    case Confidence::High: return "high";
  }
  return "?";
}

const char* to_string(Relation v) {
  switch (v) {
    case Relation::Agree: return "agree";
    case Relation::BroadlySupported: return "broadly_supported";
    case Relation::Disagreement: return "disagreement";
    case Relation::HardDisagreement: return "hard_disagreement";
    case Relation::PartialObjectSupport: return "partial_object_support";
    case Relation::ScoreObjectDisagreement: return "score_object_disagreement";
    case Relation::AgreeNonRowWise: return "agree_non_row_wise";
  }
  return "?";
}

const char* to_string(ReviewClass v) {
  switch (v) {
    case ReviewClass::BroadSupport: return "broad_support";
    case ReviewClass::BoundaryDisagreement: return "boundary_disagreement";
    case ReviewClass::MatrixLevel: return "matrix_level";
  }
  return "?";
}

namespace {

std::optional<AsymmetryFound> asymmetry_from_string(const std::string& s) {
  if (s == "yes") return AsymmetryFound::Yes;
  if (s == "no") return AsymmetryFound::No;
  if (s == "non_row_wise") return AsymmetryFound::NonRowWise;
  if (s == "difficult") return AsymmetryFound::Difficult;
  return std::nullopt;
}

std::optional<Confidence> confidence_from_string(const std::string& s) {
  if (s == "low") return Confidence::Low;
  if (s == "medium") return Confidence::Medium;
  if (s == "high") return Confidence::High;
  return std::nullopt;
}

std::optional<Relation> relation_from_string(const std::string& s) {
  if (s == "agree") return Relation::Agree;
  if (s == "broadly_supported") return Relation::BroadlySupported;
  if (s == "disagreement") return Relation::Disagreement;
  if (s == "hard_disagreement") return Relation::HardDisagreement;
  if (s == "partial_object_support") return Relation::PartialObjectSupport;
  if (s == "score_object_disagreement") return Relation::ScoreObjectDisagreement;
  if (s == "agree_non_row_wise") return Relation::AgreeNonRowWise;
  return std::nullopt;
}

Reading parse_reading(const json& node, const std::string& path) {
  Reading reading;
  if (!node.is_object())
    throw SdeError(ErrorCode::SchemaError, path + " must be an object");
  if (!node.contains("asymmetry_found"))
    throw SdeError(ErrorCode::SchemaError, path + " missing asymmetry_found");
  reading.asymmetry_found_raw = node["asymmetry_found"].get<std::string>();
  reading.asymmetry_found = asymmetry_from_string(reading.asymmetry_found_raw);
  if (node.contains("confidence")) {
    reading.confidence_raw = node["confidence"].get<std::string>();
    reading.confidence = confidence_from_string(reading.confidence_raw);
  }
  reading.object_note = node.value("object_note", "");
  return reading;
}

json reading_to_json(const Reading& reading) {
  json node;
  node["asymmetry_found"] = reading.asymmetry_found
                                ? to_string(*reading.asymmetry_found)
                                : reading.asymmetry_found_raw;
  if (reading.confidence) node["confidence"] = to_string(*reading.confidence);
  else if (!reading.confidence_raw.empty()) node["confidence"] = reading.confidence_raw;
  if (!reading.object_note.empty()) node["object_note"] = reading.object_note;
  return node;
}

}  // namespace

std::vector<ReviewUnit> parse_review(const std::string& text,
                                     const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, origin + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("units") || !doc["units"].is_array())
    throw SdeError(ErrorCode::SchemaError, origin + ": expected {units: [...]}");

  std::vector<ReviewUnit> units;
  for (std::size_t i = 0; i < doc["units"].size(); ++i) {
    const json& node = doc["units"][i];
    const std::string path = origin + ":units[" + std::to_string(i) + "]";
    try {
      ReviewUnit unit;
      unit.unit_id = node.at("unit_id").get<std::string>();
      unit.family_ref = node.at("family_ref").get<std::string>();
      const json& layer_ref = node.at("layer_ref");
      unit.layer_ref.layer =
          layer_from_string(layer_ref.at("layer").get<std::string>());
      if (layer_ref.contains("variant"))
        unit.layer_ref.variant =
            variant_from_string(layer_ref["variant"].get<std::string>());
      unit.layer_ref.pattern_tag = layer_ref.value("pattern_tag", "");
      unit.primary_reading =
          parse_reading(node.at("primary_reading"), path + ".primary_reading");
      unit.second_reading =
          parse_reading(node.at("second_reading"), path + ".second_reading");
      unit.relation_raw = node.at("relation").get<std::string>();
      unit.relation = relation_from_string(unit.relation_raw);
      unit.note = node.value("note", "");
      units.push_back(std::move(unit));
    } catch (const json::exception& e) {
      throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
    }
  }
  return units;
}

std::vector<ReviewUnit> load_review(const std::string& path) {
  return parse_review(read_file(path), path);
}

std::string serialize_review(const std::vector<ReviewUnit>& units) {
  json doc;
  json list = json::array();
  for (const auto& unit : units) {
    json node;
    node["unit_id"] = unit.unit_id;
    node["family_ref"] = unit.family_ref;
    json layer_ref;
    layer_ref["layer"] = to_string(unit.layer_ref.layer);
    if (unit.layer_ref.variant)
      layer_ref["variant"] = to_string(*unit.layer_ref.variant);
    if (!unit.layer_ref.pattern_tag.empty())
      layer_ref["pattern_tag"] = unit.layer_ref.pattern_tag;
    node["layer_ref"] = std::move(layer_ref);
    node["primary_reading"] = reading_to_json(unit.primary_reading);
    node["second_reading"] = reading_to_json(unit.second_reading);
    node["relation"] = unit.relation ? to_string(*unit.relation) : unit.relation_raw;
    if (!unit.note.empty()) node["note"] = unit.note;
    list.push_back(std::move(node));
  }
  doc["units"] = std::move(list);
  return doc.dump(2) + "\n";
}

namespace {

void validate_reading(const Reading& reading, const std::string& path,
                      ValidationReport& report) {
  if (!reading.asymmetry_found)
    report.add("ENUM_ERROR", path,
               "unknown asymmetry_found '" + reading.asymmetry_found_raw + "'");
  if (!reading.confidence_raw.empty() && !reading.confidence)
    report.add("ENUM_ERROR", path,
               "unknown confidence '" + reading.confidence_raw + "'");
  if (reading.asymmetry_found &&
      (*reading.asymmetry_found == AsymmetryFound::Yes ||
       *reading.asymmetry_found == AsymmetryFound::No) &&
      !reading.confidence)
    report.add("MISSING_CONFIDENCE", path,
               "yes/no reading requires a confidence");
}

}  // namespace

ValidationReport validate_review(const std::vector<ReviewUnit>& units) {
  ValidationReport report;
  report.family_count = 0;
  report.prompt_count = static_cast<int>(units.size());
  std::set<std::string> seen;
  for (const auto& unit : units) {
    if (!seen.insert(unit.unit_id).second)
      report.add("DUPLICATE_UNIT", unit.unit_id, "unit_id appears more than once");
    if (!unit.relation)
      report.add("ENUM_ERROR", unit.unit_id,
                 "unknown relation '" + unit.relation_raw + "'");
    validate_reading(unit.primary_reading, unit.unit_id + ".primary_reading", report);
    validate_reading(unit.second_reading, unit.unit_id + ".second_reading", report);
  }
  return report;
}

ReviewClass review_class_for(Relation relation) {
  switch (relation) {
    case Relation::Agree:
    case Relation::BroadlySupported:
      return ReviewClass::BroadSupport;
    case Relation::Disagreement:
    case Relation::HardDisagreement:
      return ReviewClass::BoundaryDisagreement;
    case Relation::PartialObjectSupport:
    case Relation::ScoreObjectDisagreement:
    case Relation::AgreeNonRowWise:
      return ReviewClass::MatrixLevel;
  }
  return ReviewClass::MatrixLevel;
}

ConsolidationSummary consolidate(const std::vector<ReviewUnit>& units) {
  const ValidationReport report = validate_review(units);
  if (!report.ok)
    throw SdeError(ErrorCode::InvalidUnits,
                   std::to_string(report.findings.size()) +
                       " review validation findings; fix the record first");
  ConsolidationSummary summary;
  for (const auto& unit : units) {
    const ReviewClass review_class = review_class_for(*unit.relation);
    switch (review_class) {
      case ReviewClass::BroadSupport: ++summary.broad_support; break;
      case ReviewClass::BoundaryDisagreement: ++summary.boundary_disagreement; break;
      case ReviewClass::MatrixLevel: ++summary.matrix_level; break;
    }
    summary.per_unit.emplace_back(unit.unit_id, review_class);
  }
  return summary;
}

std::vector<Finding> review_coverage(const std::vector<ReviewUnit>& units,
                                     const Suite& suite) {
  std::vector<Finding> findings;
  for (const auto& unit : units) {
    if (suite.find_family(unit.family_ref) == nullptr) {
      findings.push_back({"UNKNOWN_FAMILY", unit.unit_id,
                          "family '" + unit.family_ref + "' is not in suite '" +
                              suite.suite_id + "'",
                          Severity::Error});
      continue;
    }
    if (unit.layer_ref.layer == Layer::Meta)
      findings.push_back({"LAYER_NOT_REVIEWABLE", unit.unit_id,
                          "meta rows are never scored or reviewed",
                          Severity::Error});
  }
  return findings;
}

std::string serialize_consolidation(const ConsolidationSummary& summary) {
  json doc;
  doc["counts"] = {{"broad_support", summary.broad_support},
                   {"boundary_disagreement", summary.boundary_disagreement},
                   {"matrix_level", summary.matrix_level}};
  doc["unit_count"] = summary.total();
  json per_unit = json::array();
  for (const auto& [unit_id, review_class] : summary.per_unit)
    per_unit.push_back({{"unit_id", unit_id}, {"class", to_string(review_class)}});
  doc["per_unit"] = std::move(per_unit);
  return doc.dump(2) + "\n";
}

namespace {

std::optional<ReviewClass> review_class_from_string(const std::string& s) {
  if (s == "broad_support") return ReviewClass::BroadSupport;
  if (s == "boundary_disagreement") return ReviewClass::BoundaryDisagreement;
  if (s == "matrix_level") return ReviewClass::MatrixLevel;
  return std::nullopt;
}

}  // namespace

ConsolidationSummary load_consolidation(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  ConsolidationSummary summary;
  try {
    const json& counts = doc.at("counts");
    summary.broad_support = counts.at("broad_support").get<int>();
    summary.boundary_disagreement = counts.at("boundary_disagreement").get<int>();
    summary.matrix_level = counts.at("matrix_level").get<int>();
    if (doc.contains("per_unit")) {
      for (const auto& node : doc["per_unit"]) {
        auto review_class =
            review_class_from_string(node.at("class").get<std::string>());
        if (!review_class)
          throw SdeError(ErrorCode::EnumError,
                         "class: " + node.at("class").get<std::string>());
        summary.per_unit.emplace_back(node.at("unit_id").get<std::string>(),
                                      *review_class);
      }
    }
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return summary;
}

}  // namespace sde
