#include "sde/classify.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "sde/error.hpp"
#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

void validate_thresholds(const Thresholds& thresholds) {
  if (thresholds.surface_signal_min < 0 || thresholds.contraction_min < 0 ||
      thresholds.stable_pas_max < 0 || thresholds.contradiction_rate_max < 0 ||
      thresholds.cos_min < 0)
    throw SdeError(ErrorCode::ConfigError, "thresholds must be nonnegative");
  if (!(thresholds.surface_signal_min > thresholds.stable_pas_max))
    throw SdeError(ErrorCode::ConfigError,
                   "surface_signal_min must exceed stable_pas_max");
}

const char* to_string(SurfaceOnlyLabel label) {
  return label == SurfaceOnlyLabel::Signal ? "Signal" : "LowSignal";
}

const char* to_string(ConditionalOnlyLabel label) {
  switch (label) {
    case ConditionalOnlyLabel::Signal: return "Signal";
    case ConditionalOnlyLabel::LowSignal: return "LowSignal";
    case ConditionalOnlyLabel::Drifting: return "Drifting";
  }
  return "?";
}

const char* to_string(DecomposedLabel label) {
  switch (label) {
    case DecomposedLabel::StableLow: return "StableLow";
    case DecomposedLabel::StableSignal: return "StableSignal";
    case DecomposedLabel::StructuralContraction: return "StructuralContraction";
    case DecomposedLabel::EvidenceSensitive: return "EvidenceSensitive";
    case DecomposedLabel::Drifting: return "Drifting";
  }
  return "?";
}

FamilyPattern classify_family(const FamilyGeometry& geometry,
                              const FamilyDiagnostics& diag,
                              const Thresholds& thresholds) {
  FamilyPattern pattern;
  pattern.family_id = geometry.family_id;

  const bool drifting =
      (diag.contradiction_rate &&
       *diag.contradiction_rate > thresholds.contradiction_rate_max) ||
      (diag.cos_mean && *diag.cos_mean < thresholds.cos_min);

  pattern.surface_only_label = geometry.surface_pas >= thresholds.surface_signal_min
                                   ? SurfaceOnlyLabel::Signal
                                   : SurfaceOnlyLabel::LowSignal;

  pattern.conditional_only_label =
      drifting ? ConditionalOnlyLabel::Drifting
      : geometry.conditional_pas >= thresholds.surface_signal_min
          ? ConditionalOnlyLabel::Signal
          : ConditionalOnlyLabel::LowSignal;

  const bool contraction =
      geometry.surface_pas >= thresholds.surface_signal_min &&
      (geometry.surface_pas - geometry.structural_pas) >= thresholds.contraction_min;
  const bool evidence_sensitive =
      std::fabs(geometry.support_pas - geometry.counter_pas) >=
      thresholds.contraction_min;
  const bool all_signal =
      geometry.surface_pas >= thresholds.surface_signal_min &&
      geometry.structural_pas >= thresholds.surface_signal_min &&
      geometry.conditional_pas >= thresholds.surface_signal_min;

  if (drifting) pattern.decomposed_label = DecomposedLabel::Drifting;
  else if (contraction) pattern.decomposed_label = DecomposedLabel::StructuralContraction;
  else if (evidence_sensitive) pattern.decomposed_label = DecomposedLabel::EvidenceSensitive;
  else if (all_signal) pattern.decomposed_label = DecomposedLabel::StableSignal;
  else pattern.decomposed_label = DecomposedLabel::StableLow;

  pattern.surface_only_overstates =
      pattern.surface_only_label == SurfaceOnlyLabel::Signal &&
      pattern.decomposed_label == DecomposedLabel::StructuralContraction;

  // Stable means every view lands in a stable bucket: the whole profile is
  // either uniform signal or uniformly below the stable ceiling, with no
  // diagnostic drift.
  const bool stable_low =
      pattern.decomposed_label == DecomposedLabel::StableLow &&
      geometry.surface_pas <= thresholds.stable_pas_max &&
      geometry.structural_pas <= thresholds.stable_pas_max &&
      geometry.conditional_pas <= thresholds.stable_pas_max;
  pattern.all_views_stable =
      !drifting && (pattern.decomposed_label == DecomposedLabel::StableSignal ||
                    stable_low);
  return pattern;
}

PatternSummary summarize_patterns(const std::vector<FamilyPattern>& patterns) {
  PatternSummary summary;
  summary.family_count = static_cast<int>(patterns.size());
  std::set<std::string> seen;
  for (const auto& pattern : patterns) {
    if (!seen.insert(pattern.family_id).second)
      throw SdeError(ErrorCode::DuplicateFamily, pattern.family_id);
    if (pattern.surface_only_overstates) ++summary.overstated_count;
    if (pattern.all_views_stable) ++summary.stable_count;
    summary.per_family.push_back(pattern);
  }
  return summary;
}

namespace {

json thresholds_to_json(const Thresholds& thresholds) {
  return {{"surface_signal_min", thresholds.surface_signal_min},
          {"contraction_min", thresholds.contraction_min},
          {"stable_pas_max", thresholds.stable_pas_max},
          {"contradiction_rate_max", thresholds.contradiction_rate_max},
          {"cos_min", thresholds.cos_min}};
}

Thresholds thresholds_from_json(const json& node) {
  Thresholds thresholds;
  thresholds.surface_signal_min =
      node.value("surface_signal_min", thresholds.surface_signal_min);
  thresholds.contraction_min =
      node.value("contraction_min", thresholds.contraction_min);
  thresholds.stable_pas_max = node.value("stable_pas_max", thresholds.stable_pas_max);
  thresholds.contradiction_rate_max =
      node.value("contradiction_rate_max", thresholds.contradiction_rate_max);
  thresholds.cos_min = node.value("cos_min", thresholds.cos_min);
  return thresholds;
}

SurfaceOnlyLabel surface_label_from_string(const std::string& s) {
  if (s == "Signal") return SurfaceOnlyLabel::Signal;
  if (s == "LowSignal") return SurfaceOnlyLabel::LowSignal;
  throw SdeError(ErrorCode::EnumError, "surface_only_label: " + s);
}

ConditionalOnlyLabel conditional_label_from_string(const std::string& s) {
  if (s == "Signal") return ConditionalOnlyLabel::Signal;
  if (s == "LowSignal") return ConditionalOnlyLabel::LowSignal;
  if (s == "Drifting") return ConditionalOnlyLabel::Drifting;
  throw SdeError(ErrorCode::EnumError, "conditional_only_label: " + s);
}

DecomposedLabel decomposed_label_from_string(const std::string& s) {
  if (s == "StableLow") return DecomposedLabel::StableLow;
  if (s == "StableSignal") return DecomposedLabel::StableSignal;
  if (s == "StructuralContraction") return DecomposedLabel::StructuralContraction;
  if (s == "EvidenceSensitive") return DecomposedLabel::EvidenceSensitive;
  if (s == "Drifting") return DecomposedLabel::Drifting;
  throw SdeError(ErrorCode::EnumError, "decomposed_label: " + s);
}

}  // namespace

std::string serialize_classification(const PatternSummary& summary,
                                     const Thresholds& thresholds) {
  json doc;
  doc["run_id"] = summary.run_id;
  doc["thresholds"] = thresholds_to_json(thresholds);
  doc["family_count"] = summary.family_count;
  doc["overstated_count"] = summary.overstated_count;
  doc["stable_count"] = summary.stable_count;
  json per_family = json::array();
  for (const auto& pattern : summary.per_family) {
    per_family.push_back(
        {{"family_id", pattern.family_id},
         {"surface_only_label", to_string(pattern.surface_only_label)},
         {"conditional_only_label", to_string(pattern.conditional_only_label)},
         {"decomposed_label", to_string(pattern.decomposed_label)},
         {"surface_only_overstates", pattern.surface_only_overstates},
         {"all_views_stable", pattern.all_views_stable}});
  }
  doc["per_family"] = std::move(per_family);
  return doc.dump(2) + "\n";
}

void save_classification(const PatternSummary& summary, const Thresholds& thresholds,
                         const std::string& path) {
  write_file(path, serialize_classification(summary, thresholds));
}

PatternSummary load_classification(const std::string& path, Thresholds* thresholds_out) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  PatternSummary summary;
  try {
    summary.run_id = doc.value("run_id", "");
    summary.family_count = doc.at("family_count").get<int>();
    summary.overstated_count = doc.at("overstated_count").get<int>();
    summary.stable_count = doc.at("stable_count").get<int>();
    if (thresholds_out != nullptr && doc.contains("thresholds"))
      *thresholds_out = thresholds_from_json(doc["thresholds"]);
    for (const auto& node : doc.at("per_family")) {
      FamilyPattern pattern;
      pattern.family_id = node.at("family_id").get<std::string>();
      pattern.surface_only_label =
          surface_label_from_string(node.at("surface_only_label").get<std::string>());
      pattern.conditional_only_label = conditional_label_from_string(
          node.at("conditional_only_label").get<std::string>());
      pattern.decomposed_label =
          decomposed_label_from_string(node.at("decomposed_label").get<std::string>());
      pattern.surface_only_overstates =
          node.at("surface_only_overstates").get<bool>();
      pattern.all_views_stable = node.at("all_views_stable").get<bool>();
      summary.per_family.push_back(std::move(pattern));
    }
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return summary;
}

Thresholds load_thresholds(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  const Thresholds thresholds = thresholds_from_json(doc);
  validate_thresholds(thresholds);
  return thresholds;
}

}  // namespace sde
