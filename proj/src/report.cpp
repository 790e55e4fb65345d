#include "sde/report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "sde/error.hpp"
#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

void upsert_manifest_artifact(RunManifest& manifest, const std::string& kind,
                              const std::string& path) {
  ArtifactRef ref{kind, path, content_digest(read_file(path))};
  for (auto& artifact : manifest.artifacts) {
    if (artifact.path == path) {
      artifact = ref;
      return;
    }
  }
  manifest.artifacts.push_back(std::move(ref));
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json doc;
  doc["run_id"] = manifest.run_id;
  doc["suite_id"] = manifest.suite_id;
  doc["suite_version"] = manifest.suite_version;
  doc["actor_model"] = manifest.actor_model;
  doc["readouts"] = manifest.readouts;
  json artifacts = json::array();
  for (const auto& artifact : manifest.artifacts)
    artifacts.push_back({{"kind", artifact.kind},
                         {"path", artifact.path},
                         {"digest", artifact.digest}});
  doc["artifacts"] = std::move(artifacts);
  doc["created_at"] = manifest.created_at;
  write_file(path, doc.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  RunManifest manifest;
  try {
    manifest.run_id = doc.value("run_id", "");
    manifest.suite_id = doc.value("suite_id", "");
    manifest.suite_version = doc.value("suite_version", "");
    manifest.actor_model = doc.value("actor_model", "");
    if (doc.contains("readouts"))
      manifest.readouts = doc["readouts"].get<std::vector<std::string>>();
    for (const auto& node : doc.at("artifacts"))
      manifest.artifacts.push_back({node.at("kind").get<std::string>(),
                                    node.at("path").get<std::string>(),
                                    node.at("digest").get<std::string>()});
    manifest.created_at = doc.value("created_at", "");
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return manifest;
}

void verify_manifest(const RunManifest& manifest) {
  for (const auto& artifact : manifest.artifacts) {
    std::string bytes;
    try {
      bytes = read_file(artifact.path);
    } catch (const SdeError&) {
      throw SdeError(ErrorCode::IntegrityError,
                     artifact.path + " is missing");
    }
    const std::string digest = content_digest(bytes);
    if (digest != artifact.digest)
      throw SdeError(ErrorCode::IntegrityError,
                     artifact.path + " digest " + digest + " != manifest " +
                         artifact.digest);
  }
}

namespace {

json manifest_to_json(const RunManifest& manifest) {
  json node;
  node["run_id"] = manifest.run_id;
  node["suite_id"] = manifest.suite_id;
  node["suite_version"] = manifest.suite_version;
  node["actor_model"] = manifest.actor_model;
  node["readouts"] = manifest.readouts;
  json artifacts = json::array();
  for (const auto& artifact : manifest.artifacts)
    artifacts.push_back({{"kind", artifact.kind},
                         {"path", artifact.path},
                         {"digest", artifact.digest}});
  node["artifacts"] = std::move(artifacts);
  node["created_at"] = manifest.created_at;
  return node;
}

std::string pad(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

std::string lead(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : std::string(width - text.size(), ' ') + text;
}

void render_geometry_text(std::ostringstream& out, const GeometrySummary& summary) {
  out << "geometry: run " << summary.run_id << " (" << to_string(summary.readout)
      << ", judge " << summary.judge_model << ", actor " << summary.actor_model
      << ")\n";
  out << "  layer means over " << summary.family_count << " families:  surface "
      << render3(summary.surface_mean) << "  structural "
      << render3(summary.structural_mean) << "  conditional "
      << render3(summary.conditional_mean) << "\n";
  if (summary.diagnostics) {
    out << "  diagnostics: contradiction_rate "
        << render3(summary.diagnostics->contradiction_rate) << "  cos_mean "
        << render3(summary.diagnostics->cos_mean) << "  parse_failures "
        << summary.diagnostics->parse_failure_count << "\n";
  }
  if (!summary.family_geometries.empty()) {
    std::size_t width = 8;
    for (const auto& geometry : summary.family_geometries)
      width = std::max(width, geometry.family_id.size());
    out << "  " << pad("family", width) << lead("surface", 10)
        << lead("structural", 12) << lead("support", 10) << lead("counter", 10)
        << lead("conditional", 13) << "\n";
    for (const auto& geometry : summary.family_geometries) {
      out << "  " << pad(geometry.family_id, width)
          << lead(render3(geometry.surface_pas), 10)
          << lead(render3(geometry.structural_pas), 12)
          << lead(render3(geometry.support_pas), 10)
          << lead(render3(geometry.counter_pas), 10)
          << lead(render3(geometry.conditional_pas), 13) << "\n";
    }
  }
}

}  // namespace

AuditReport render_report(const ReportInputs& inputs) {
  if (inputs.geometries.empty())
    throw SdeError(ErrorCode::MissingSection, "geometry");

  const std::string created_at =
      inputs.fixed_timestamp ? kFixedTimestamp : utc_now_iso8601();

  json doc;
  doc["created_at"] = created_at;
  if (inputs.manifest) doc["manifest"] = manifest_to_json(*inputs.manifest);
  if (inputs.validation) {
    doc["validation"] = {{"suite_id", inputs.validation->suite_id},
                         {"ok", inputs.validation->ok},
                         {"family_count", inputs.validation->family_count},
                         {"prompt_count", inputs.validation->prompt_count},
                         {"finding_count", inputs.validation->finding_count}};
  }

  json geometries = json::array();
  for (const auto& summary : inputs.geometries)
    geometries.push_back(json::parse(serialize_geometry_summary(summary)));
  doc["geometry"] = std::move(geometries);

  if (inputs.classification) {
    const Thresholds thresholds = inputs.thresholds.value_or(Thresholds{});
    doc["classification"] =
        json::parse(serialize_classification(*inputs.classification, thresholds));
  }
  if (inputs.thresholds) {
    doc["thresholds"] = {
        {"surface_signal_min", inputs.thresholds->surface_signal_min},
        {"contraction_min", inputs.thresholds->contraction_min},
        {"stable_pas_max", inputs.thresholds->stable_pas_max},
        {"contradiction_rate_max", inputs.thresholds->contradiction_rate_max},
        {"cos_min", inputs.thresholds->cos_min}};
  }
  if (!inputs.comparisons.empty()) {
    json comparisons = json::array();
    for (const auto& [mode, comparison] : inputs.comparisons)
      comparisons.push_back(json::parse(serialize_comparison(comparison, mode)));
    doc["comparisons"] = std::move(comparisons);
  }
  if (inputs.rewrite)
    doc["rewrite_delta"] = json::parse(serialize_rewrite_delta(*inputs.rewrite));
  if (inputs.review)
    doc["review"] = json::parse(serialize_consolidation(*inputs.review));

  std::ostringstream text;
  text << "=== sde audit report ===\n";
  text << "created_at: " << created_at << "\n";
  if (inputs.manifest) {
    text << "\nmanifest: run " << inputs.manifest->run_id << " on suite "
         << inputs.manifest->suite_id << "@" << inputs.manifest->suite_version
         << " (actor " << inputs.manifest->actor_model << ")\n";
    for (const auto& artifact : inputs.manifest->artifacts)
      text << "  " << pad(artifact.kind, 16) << artifact.digest << "  "
           << artifact.path << "\n";
  }
  if (inputs.validation) {
    text << "\nvalidation: " << inputs.validation->suite_id << " -> "
         << (inputs.validation->ok ? "ok" : "NOT OK") << ", "
         << inputs.validation->family_count << " families / "
         << inputs.validation->prompt_count << " prompts, "
         << inputs.validation->finding_count << " findings\n";
  }
  for (const auto& summary : inputs.geometries) {
    text << "\n";
    render_geometry_text(text, summary);
  }
  if (inputs.classification) {
    text << "\nclassification: " << inputs.classification->overstated_count
         << " surface-only overstatements / " << inputs.classification->stable_count
         << " stable of " << inputs.classification->family_count << " families\n";
    for (const auto& pattern : inputs.classification->per_family) {
      text << "  " << pad(pattern.family_id, 48)
           << pad(to_string(pattern.decomposed_label), 24)
           << (pattern.surface_only_overstates ? " overstates"
               : pattern.all_views_stable      ? " stable"
                                               : "")
           << "\n";
    }
  }
  if (inputs.thresholds) {
    text << "\nthresholds: surface_signal_min "
         << render3(inputs.thresholds->surface_signal_min) << ", contraction_min "
         << render3(inputs.thresholds->contraction_min) << ", stable_pas_max "
         << render3(inputs.thresholds->stable_pas_max)
         << ", contradiction_rate_max "
         << render3(inputs.thresholds->contradiction_rate_max) << ", cos_min "
         << render3(inputs.thresholds->cos_min) << "\n";
  }
  for (const auto& [mode, comparison] : inputs.comparisons) {
    text << "\ncomparison (" << mode << "):\n"
         << render_comparison_table(comparison);
  }
  if (inputs.rewrite) text << "\nstructural-why rewrite:\n" << render_rewrite_delta(*inputs.rewrite);
  if (inputs.review) {
    text << "\nreview consolidation over " << inputs.review->total()
         << " units: broad_support " << inputs.review->broad_support
         << ", boundary_disagreement " << inputs.review->boundary_disagreement
         << ", matrix_level " << inputs.review->matrix_level << "\n";
  }

  AuditReport report;
  report.document = doc.dump(2) + "\n";
  report.text = text.str();
  return report;
}

}  // namespace sde
