// Layer-geometry comparison across readout regimes, across actor models, and
// across structural-prompt rewrites.

#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sde/geometry.hpp"

namespace sde {

struct RunSummaryRef {
  std::string label;
  LayerGeometry layer_geometry;
  std::string suite_id;
  std::string actor_model;
  ReadoutKind readout = ReadoutKind::PasReasonAnchor;
};

RunSummaryRef make_summary_ref(const GeometrySummary& summary,
                               const std::string& label = "");

struct ComparisonRow {
  std::string label;
  double surface = 0.0;
  double structural = 0.0;
  double conditional = 0.0;
};

struct GeometryComparison {
  std::string suite_id;
  std::string baseline_label;
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonRow> deltas;  // vs baseline; empty for single-row tables
};

// Same suite, varying readout; deltas against the named baseline row.
// Throws SUITE_MISMATCH and UNKNOWN_BASELINE.
GeometryComparison compare_readouts(const std::vector<RunSummaryRef>& summaries,
                                    const std::string& baseline_label);

// Same suite and readout, varying actor model; first row is the baseline.
// Throws SUITE_MISMATCH and READOUT_MISMATCH.
GeometryComparison compare_models(const std::vector<RunSummaryRef>& summaries);

struct RewriteDelta {
  std::vector<std::string> subset_family_ids;
  // (family, canonical structural_pas, rewrite structural_pas)
  std::vector<std::tuple<std::string, double, double>> pairs;
  int changed_count = 0;
  double change_min = 0.5;
};

// Counts subset families whose structural PAS moved by at least change_min
// between the canonical run and the direct-why rewrite run.
// Throws MISSING_FAMILY when either run lacks a subset family.
RewriteDelta structural_rewrite_delta(
    const std::map<std::string, double>& base_structural,
    const std::map<std::string, double>& rewrite_structural,
    const std::vector<std::string>& subset, double change_min);

std::map<std::string, double> structural_values(const GeometrySummary& summary);

// Aligned plain-text table, values at three decimals.
std::string render_comparison_table(const GeometryComparison& comparison);
std::string render_rewrite_delta(const RewriteDelta& delta);

std::string serialize_comparison(const GeometryComparison& comparison,
                                 const std::string& mode);
std::string serialize_rewrite_delta(const RewriteDelta& delta);

// Inverse of the serializers, for report assembly. mode_out receives
// "readouts" or "models".
GeometryComparison load_comparison(const std::string& path, std::string* mode_out);
RewriteDelta load_rewrite_delta(const std::string& path);

}  // namespace sde
