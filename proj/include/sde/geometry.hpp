// Aggregation of verdicts into row separations, family-layer PAS values,
// run-level layer means, and diagnostic rates.
//
// Side-wise rows separate as |score_A - score_B| of integer side scores, so
// family surface/structural values are integers and the conditional value
// (mean of the support and counter rows) lies on the 0.5 lattice.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sde/judge.hpp"
#include "sde/suite.hpp"

namespace sde {

struct RowSeparation {
  std::string family_id;
  Layer layer = Layer::Surface;
  std::optional<Variant> variant;
  double separation = 0.0;  // integer-valued, 0..4
  Direction direction = Direction::None;
};

struct FamilyGeometry {
  std::string family_id;
  double surface_pas = 0.0;
  double structural_pas = 0.0;
  double conditional_pas = 0.0;  // (support_pas + counter_pas) / 2
  double support_pas = 0.0;
  double counter_pas = 0.0;
};

struct LayerGeometry {
  std::string run_id;
  ReadoutKind readout = ReadoutKind::PasReasonAnchor;
  double surface_mean = 0.0;
  double structural_mean = 0.0;
  double conditional_mean = 0.0;
  int family_count = 0;
};

struct DiagnosticSummary {
  std::string run_id;
  ReadoutKind readout = ReadoutKind::PasReasonAnchor;
  double contradiction_rate = 0.0;  // over scored conditional verdicts
  double cos_mean = 0.0;            // over structural + conditional verdicts
  int parse_failure_count = 0;
};

// Per-family diagnostics feeding the classifier. Fields are absent for
// readouts that carry no feature diagnostics.
struct FamilyDiagnostics {
  std::optional<double> contradiction_rate;
  std::optional<double> cos_mean;
};

RowSeparation row_separation(const std::string& family_id, Layer layer,
                             std::optional<Variant> variant, int score_a,
                             int score_b);
RowSeparation row_separation(const PairedVerdict& verdict);

// Exactly the four non-Meta rows of one family.
FamilyGeometry family_geometry(const std::vector<RowSeparation>& rows);

// Arithmetic mean per layer over one geometry per family. Throws EMPTY_INPUT
// and DUPLICATE_FAMILY. run_id/readout are left for the caller to fill.
LayerGeometry layer_means(const std::vector<FamilyGeometry>& geometries);

// Feature-readout diagnostics; throws WRONG_READOUT otherwise. The suite
// provides the layer of each scored prompt.
DiagnosticSummary diagnostics(const VerdictSet& verdicts, const Suite& suite);
std::map<std::string, FamilyDiagnostics> family_diagnostics(
    const VerdictSet& verdicts, const Suite& suite);

// Full aggregation of one verdict set: rows, per-family geometry, layer
// means, diagnostics. Families missing a row (parse failures) are excluded
// from the means and reported as findings.
struct GeometryResult {
  std::vector<RowSeparation> rows;
  std::vector<FamilyGeometry> families;
  LayerGeometry means;
  std::optional<DiagnosticSummary> diag;
  std::map<std::string, FamilyDiagnostics> per_family_diag;
  std::vector<Finding> findings;
};

GeometryResult aggregate_geometry(const VerdictSet& verdicts, const Suite& suite);

// The geometry summary document. Also the format published summaries
// ship in, so comparisons over them are first-class.
struct GeometrySummary {
  std::string run_id;
  std::string suite_id;
  std::string actor_model;
  ReadoutKind readout = ReadoutKind::PasReasonAnchor;
  std::string judge_model;
  int family_count = 0;
  double surface_mean = 0.0;
  double structural_mean = 0.0;
  double conditional_mean = 0.0;
  std::vector<FamilyGeometry> family_geometries;
  std::map<std::string, FamilyDiagnostics> per_family_diag;
  std::optional<DiagnosticSummary> diagnostics;

  LayerGeometry layer_geometry() const {
    return {run_id, readout, surface_mean, structural_mean, conditional_mean,
            family_count};
  }
};

GeometrySummary make_geometry_summary(const GeometryResult& result,
                                      const VerdictSet& verdicts,
                                      const std::string& suite_id,
                                      const std::string& actor_model);

std::string serialize_geometry_summary(const GeometrySummary& summary);
void save_geometry_summary(const GeometrySummary& summary, const std::string& path);
GeometrySummary load_geometry_summary(const std::string& path);

}  // namespace sde
