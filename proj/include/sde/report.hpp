// Run manifests (artifact paths + content digests) and deterministic audit
// report rendering. The report is emitted both as a machine document and as
// a plain-text table view; with a fixed timestamp, equal inputs produce
// byte-identical bytes.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sde/classify.hpp"
#include "sde/compare.hpp"
#include "sde/geometry.hpp"
#include "sde/review.hpp"

namespace sde {

struct ArtifactRef {
  std::string kind;  // run | verdicts | geometry | classification | comparison | review
  std::string path;
  std::string digest;
};

struct RunManifest {
  std::string run_id;
  std::string suite_id;
  std::string suite_version;
  std::string actor_model;
  std::vector<std::string> readouts;
  std::vector<ArtifactRef> artifacts;
  std::string created_at;
};

// Inserts or replaces the entry for `path`, digesting the file contents.
void upsert_manifest_artifact(RunManifest& manifest, const std::string& kind,
                              const std::string& path);

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Every referenced artifact must exist and digest-match; throws
// INTEGRITY_ERROR otherwise.
void verify_manifest(const RunManifest& manifest);

struct SuiteShapeSummary {
  std::string suite_id;
  bool ok = false;
  int family_count = 0;
  int prompt_count = 0;
  int finding_count = 0;
};

struct ReportInputs {
  std::optional<RunManifest> manifest;
  std::optional<SuiteShapeSummary> validation;
  std::vector<GeometrySummary> geometries;  // at least one is required
  std::optional<PatternSummary> classification;
  std::optional<Thresholds> thresholds;
  std::vector<std::pair<std::string, GeometryComparison>> comparisons;  // (mode, cmp)
  std::optional<RewriteDelta> rewrite;
  std::optional<ConsolidationSummary> review;
  bool fixed_timestamp = false;
};

struct AuditReport {
  std::string document;  // machine-readable JSON
  std::string text;      // human-readable tables
};

// Throws MISSING_SECTION when no geometry is supplied.
AuditReport render_report(const ReportInputs& inputs);

}  // namespace sde
