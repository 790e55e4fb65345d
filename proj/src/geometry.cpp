#include "sde/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sde/error.hpp"
#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

RowSeparation row_separation(const std::string& family_id, Layer layer,
                             std::optional<Variant> variant, int score_a,
                             int score_b) {
  RowSeparation row;
  row.family_id = family_id;
  row.layer = layer;
  row.variant = variant;
  row.separation = std::abs(score_a - score_b);
  row.direction = score_a > score_b   ? Direction::AFavored
                  : score_b > score_a ? Direction::BFavored
                                      : Direction::None;
  return row;
}

RowSeparation row_separation(const PairedVerdict& verdict) {
  RowSeparation row;
  row.family_id = verdict.family_id;
  row.layer = verdict.layer;
  row.variant = verdict.variant;
  row.separation = verdict.separation;
  row.direction = verdict.direction;
  return row;
}

FamilyGeometry family_geometry(const std::vector<RowSeparation>& rows) {
  const RowSeparation* surface = nullptr;
  const RowSeparation* structural = nullptr;
  const RowSeparation* support = nullptr;
  const RowSeparation* counter = nullptr;
  for (const auto& row : rows) {
    switch (row.layer) {
      case Layer::Surface: surface = &row; break;
      case Layer::Structural: structural = &row; break;
      case Layer::Conditional:
        if (row.variant == Variant::Support) support = &row;
        else if (row.variant == Variant::Counter) counter = &row;
        break;
      case Layer::Meta: break;
    }
  }
  if (surface == nullptr)
    throw SdeError(ErrorCode::MissingRow, "surface");
  if (structural == nullptr)
    throw SdeError(ErrorCode::MissingRow, "structural");
  if (support == nullptr)
    throw SdeError(ErrorCode::MissingRow, "conditional/support");
  if (counter == nullptr)
    throw SdeError(ErrorCode::MissingRow, "conditional/counter");

  FamilyGeometry geometry;
  geometry.family_id = surface->family_id;
  geometry.surface_pas = surface->separation;
  geometry.structural_pas = structural->separation;
  geometry.support_pas = support->separation;
  geometry.counter_pas = counter->separation;
  geometry.conditional_pas = (support->separation + counter->separation) / 2.0;
  return geometry;
}

LayerGeometry layer_means(const std::vector<FamilyGeometry>& geometries) {
  if (geometries.empty())
    throw SdeError(ErrorCode::EmptyInput, "no family geometries");
  std::set<std::string> seen;
  double surface = 0.0, structural = 0.0, conditional = 0.0;
  for (const auto& geometry : geometries) {
    if (!seen.insert(geometry.family_id).second)
      throw SdeError(ErrorCode::DuplicateFamily, geometry.family_id);
    surface += geometry.surface_pas;
    structural += geometry.structural_pas;
    conditional += geometry.conditional_pas;
  }
  const double count = static_cast<double>(geometries.size());
  LayerGeometry means;
  means.surface_mean = surface / count;
  means.structural_mean = structural / count;
  means.conditional_mean = conditional / count;
  means.family_count = static_cast<int>(geometries.size());
  return means;
}

namespace {

struct LayerLookup {
  std::map<std::string, const PromptRecord*> by_prompt_id;

  explicit LayerLookup(const Suite& suite) {
    for (const auto& family : suite.families)
      for (const auto& record : family.records)
        by_prompt_id[record.prompt_id] = &record;
  }

  const PromptRecord* find(const std::string& prompt_id) const {
    auto it = by_prompt_id.find(prompt_id);
    return it == by_prompt_id.end() ? nullptr : it->second;
  }
};

}  // namespace

DiagnosticSummary diagnostics(const VerdictSet& verdicts, const Suite& suite) {
  if (verdicts.readout != ReadoutKind::PasReasonAnchor)
    throw SdeError(ErrorCode::WrongReadout,
                   std::string("diagnostics are defined for pas_reason_anchor, got ") +
                       to_string(verdicts.readout));
  const LayerLookup lookup(suite);

  int conditional_total = 0, conditional_flagged = 0;
  int cos_total = 0;
  double cos_sum = 0.0;
  for (const auto& verdict : verdicts.feature) {
    const PromptRecord* record = lookup.find(verdict.prompt_id);
    if (record == nullptr) continue;
    if (record->layer == Layer::Conditional) {
      ++conditional_total;
      if (verdict.contradicts_supplied_evidence) ++conditional_flagged;
    }
    if (record->layer == Layer::Structural || record->layer == Layer::Conditional) {
      ++cos_total;
      cos_sum += verdict.conditions_used_fraction;
    }
  }

  DiagnosticSummary summary;
  summary.run_id = verdicts.run_id;
  summary.readout = verdicts.readout;
  summary.contradiction_rate =
      conditional_total == 0 ? 0.0
                             : static_cast<double>(conditional_flagged) /
                                   static_cast<double>(conditional_total);
  summary.cos_mean = cos_total == 0 ? 0.0 : cos_sum / static_cast<double>(cos_total);
  summary.parse_failure_count = static_cast<int>(verdicts.parse_failures.size());
  return summary;
}

std::map<std::string, FamilyDiagnostics> family_diagnostics(
    const VerdictSet& verdicts, const Suite& suite) {
  std::map<std::string, FamilyDiagnostics> result;
  if (verdicts.readout != ReadoutKind::PasReasonAnchor) return result;

  const LayerLookup lookup(suite);
  struct Tally {
    int conditional_total = 0, conditional_flagged = 0;
    int cos_total = 0;
    double cos_sum = 0.0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& verdict : verdicts.feature) {
    const PromptRecord* record = lookup.find(verdict.prompt_id);
    if (record == nullptr) continue;
    Tally& tally = tallies[record->family_id];
    if (record->layer == Layer::Conditional) {
      ++tally.conditional_total;
      if (verdict.contradicts_supplied_evidence) ++tally.conditional_flagged;
    }
    if (record->layer == Layer::Structural || record->layer == Layer::Conditional) {
      ++tally.cos_total;
      tally.cos_sum += verdict.conditions_used_fraction;
    }
  }
  for (const auto& [family_id, tally] : tallies) {
    FamilyDiagnostics diag;
    if (tally.conditional_total > 0)
      diag.contradiction_rate = static_cast<double>(tally.conditional_flagged) /
                                static_cast<double>(tally.conditional_total);
    if (tally.cos_total > 0)
      diag.cos_mean = tally.cos_sum / static_cast<double>(tally.cos_total);
    result[family_id] = diag;
  }
  return result;
}

GeometryResult aggregate_geometry(const VerdictSet& verdicts, const Suite& suite) {
  GeometryResult result;

  // family -> (layer, variant) -> side scores / paired rows
  struct SideScores {
    std::optional<int> a, b;
  };
  std::map<std::string, std::map<std::pair<int, int>, SideScores>> side_scores;
  auto row_key = [](Layer layer, std::optional<Variant> variant) {
    return std::pair<int, int>(static_cast<int>(layer),
                               variant ? 1 + static_cast<int>(*variant) : 0);
  };

  const LayerLookup lookup(suite);

  if (verdicts.readout == ReadoutKind::PairedDirectStance) {
    for (const auto& verdict : verdicts.paired)
      result.rows.push_back(row_separation(verdict));
  } else {
    auto record_score = [&](const std::string& prompt_id, int score) {
      const PromptRecord* record = lookup.find(prompt_id);
      if (record == nullptr || record->layer == Layer::Meta) return;
      SideScores& scores =
          side_scores[record->family_id][row_key(record->layer, record->variant)];
      if (record->side == Side::A) scores.a = score;
      else if (record->side == Side::B) scores.b = score;
    };
    for (const auto& verdict : verdicts.legacy)
      record_score(verdict.prompt_id, verdict.stance_score);
    for (const auto& verdict : verdicts.feature)
      record_score(verdict.prompt_id, derive_stance_from_features(verdict));

    for (const auto& [family_id, rows] : side_scores) {
      for (const auto& [key, scores] : rows) {
        const Layer layer = static_cast<Layer>(key.first);
        const std::optional<Variant> variant =
            key.second == 0 ? std::nullopt
                            : std::optional<Variant>(static_cast<Variant>(key.second - 1));
        if (!scores.a || !scores.b) {
          result.findings.push_back(
              {"MISSING_SIDE",
               family_id + "/" + to_string(layer) +
                   (variant ? std::string("/") + to_string(*variant) : ""),
               "row lacks a verdict for one side; family excluded from means",
               Severity::Warning});
          continue;
        }
        result.rows.push_back(
            row_separation(family_id, layer, variant, *scores.a, *scores.b));
      }
    }
  }

  // Assemble per-family geometry where all four rows are present.
  std::map<std::string, std::vector<RowSeparation>> by_family;
  for (const auto& row : result.rows) by_family[row.family_id].push_back(row);
  for (const auto& [family_id, rows] : by_family) {
    if (rows.size() != 4) {
      result.findings.push_back({"INCOMPLETE_FAMILY", family_id,
                                 "family has " + std::to_string(rows.size()) +
                                     " of 4 scored rows; excluded from means",
                                 Severity::Warning});
      continue;
    }
    result.families.push_back(family_geometry(rows));
  }

  if (!result.families.empty()) {
    result.means = layer_means(result.families);
    result.means.run_id = verdicts.run_id;
    result.means.readout = verdicts.readout;
  } else {
    result.means.run_id = verdicts.run_id;
    result.means.readout = verdicts.readout;
  }

  if (verdicts.readout == ReadoutKind::PasReasonAnchor) {
    result.diag = diagnostics(verdicts, suite);
    result.per_family_diag = family_diagnostics(verdicts, suite);
  }
  return result;
}

GeometrySummary make_geometry_summary(const GeometryResult& result,
                                      const VerdictSet& verdicts,
                                      const std::string& suite_id,
                                      const std::string& actor_model) {
  GeometrySummary summary;
  summary.run_id = verdicts.run_id;
  summary.suite_id = suite_id;
  summary.actor_model = actor_model;
  summary.readout = verdicts.readout;
  summary.judge_model = verdicts.judge_model;
  summary.family_count = result.means.family_count;
  summary.surface_mean = result.means.surface_mean;
  summary.structural_mean = result.means.structural_mean;
  summary.conditional_mean = result.means.conditional_mean;
  summary.family_geometries = result.families;
  summary.per_family_diag = result.per_family_diag;
  summary.diagnostics = result.diag;
  return summary;
}

std::string serialize_geometry_summary(const GeometrySummary& summary) {
  json doc;
  doc["run_id"] = summary.run_id;
  doc["suite_id"] = summary.suite_id;
  doc["actor_model"] = summary.actor_model;
  doc["readout"] = to_string(summary.readout);
  doc["judge_model"] = summary.judge_model;
  doc["family_count"] = summary.family_count;
  doc["layer_means"] = {{"surface", summary.surface_mean},
                        {"structural", summary.structural_mean},
                        {"conditional", summary.conditional_mean}};
  json families = json::array();
  for (const auto& geometry : summary.family_geometries) {
    json node;
    node["family_id"] = geometry.family_id;
    node["surface_pas"] = geometry.surface_pas;
    node["structural_pas"] = geometry.structural_pas;
    node["conditional_pas"] = geometry.conditional_pas;
    node["support_pas"] = geometry.support_pas;
    node["counter_pas"] = geometry.counter_pas;
    auto it = summary.per_family_diag.find(geometry.family_id);
    if (it != summary.per_family_diag.end()) {
      json diag;
      if (it->second.contradiction_rate)
        diag["contradiction_rate"] = *it->second.contradiction_rate;
      if (it->second.cos_mean) diag["cos_mean"] = *it->second.cos_mean;
      if (!diag.empty()) node["diagnostics"] = std::move(diag);
    }
    families.push_back(std::move(node));
  }
  doc["family_geometries"] = std::move(families);
  if (summary.diagnostics) {
    doc["diagnostics"] = {
        {"contradiction_rate", summary.diagnostics->contradiction_rate},
        {"cos_mean", summary.diagnostics->cos_mean},
        {"parse_failure_count", summary.diagnostics->parse_failure_count}};
  }
  return doc.dump(2) + "\n";
}

void save_geometry_summary(const GeometrySummary& summary, const std::string& path) {
  write_file(path, serialize_geometry_summary(summary));
}

GeometrySummary load_geometry_summary(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  GeometrySummary summary;
  try {
    summary.run_id = doc.at("run_id").get<std::string>();
    summary.suite_id = doc.at("suite_id").get<std::string>();
    summary.actor_model = doc.at("actor_model").get<std::string>();
    summary.readout = readout_from_string(doc.at("readout").get<std::string>());
    summary.judge_model = doc.value("judge_model", "");
    summary.family_count = doc.at("family_count").get<int>();
    const json& means = doc.at("layer_means");
    summary.surface_mean = means.at("surface").get<double>();
    summary.structural_mean = means.at("structural").get<double>();
    summary.conditional_mean = means.at("conditional").get<double>();
    if (doc.contains("family_geometries")) {
      for (const auto& node : doc["family_geometries"]) {
        FamilyGeometry geometry;
        geometry.family_id = node.at("family_id").get<std::string>();
        geometry.surface_pas = node.at("surface_pas").get<double>();
        geometry.structural_pas = node.at("structural_pas").get<double>();
        geometry.conditional_pas = node.at("conditional_pas").get<double>();
        geometry.support_pas = node.at("support_pas").get<double>();
        geometry.counter_pas = node.at("counter_pas").get<double>();
        if (node.contains("diagnostics")) {
          FamilyDiagnostics diag;
          const json& d = node["diagnostics"];
          if (d.contains("contradiction_rate"))
            diag.contradiction_rate = d["contradiction_rate"].get<double>();
          if (d.contains("cos_mean")) diag.cos_mean = d["cos_mean"].get<double>();
          summary.per_family_diag[geometry.family_id] = diag;
        }
        summary.family_geometries.push_back(std::move(geometry));
      }
    }
    if (doc.contains("diagnostics")) {
      DiagnosticSummary diag;
      diag.run_id = summary.run_id;
      diag.readout = summary.readout;
      const json& d = doc["diagnostics"];
      diag.contradiction_rate = d.value("contradiction_rate", 0.0);
      diag.cos_mean = d.value("cos_mean", 0.0);
      diag.parse_failure_count = d.value("parse_failure_count", 0);
      summary.diagnostics = diag;
    }
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return summary;
}

}  // namespace sde
