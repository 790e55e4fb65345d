// Per-family decomposition pattern labels under fixed thresholds, plus the
// surface-only-overstatement / stable partition counts.

#pragma once

#include <string>
#include <vector>

#include "sde/geometry.hpp"

namespace sde {

struct Thresholds {
  double surface_signal_min = 2.0;
  double contraction_min = 1.0;
  double stable_pas_max = 1.0;
  double contradiction_rate_max = 0.25;
  double cos_min = 0.5;
};

// Throws ConfigError unless all values are nonnegative and
// surface_signal_min > stable_pas_max.
void validate_thresholds(const Thresholds& thresholds);

enum class SurfaceOnlyLabel { Signal, LowSignal };
enum class ConditionalOnlyLabel { Signal, LowSignal, Drifting };
enum class DecomposedLabel {
  StableLow,
  StableSignal,
  StructuralContraction,
  EvidenceSensitive,
  Drifting,
};

const char* to_string(SurfaceOnlyLabel label);
const char* to_string(ConditionalOnlyLabel label);
const char* to_string(DecomposedLabel label);

struct FamilyPattern {
  std::string family_id;
  SurfaceOnlyLabel surface_only_label = SurfaceOnlyLabel::LowSignal;
  ConditionalOnlyLabel conditional_only_label = ConditionalOnlyLabel::LowSignal;
  DecomposedLabel decomposed_label = DecomposedLabel::StableLow;
  bool surface_only_overstates = false;
  bool all_views_stable = false;
};

struct PatternSummary {
  std::string run_id;
  int overstated_count = 0;
  int stable_count = 0;
  int family_count = 0;
  std::vector<FamilyPattern> per_family;
};

// Pure label assignment. Decomposed precedence:
// Drifting > StructuralContraction > EvidenceSensitive > StableSignal >
// StableLow.
FamilyPattern classify_family(const FamilyGeometry& geometry,
                              const FamilyDiagnostics& diag,
                              const Thresholds& thresholds);

// Headline bucket counts. Throws DUPLICATE_FAMILY.
PatternSummary summarize_patterns(const std::vector<FamilyPattern>& patterns);

std::string serialize_classification(const PatternSummary& summary,
                                     const Thresholds& thresholds);
void save_classification(const PatternSummary& summary, const Thresholds& thresholds,
                         const std::string& path);
PatternSummary load_classification(const std::string& path, Thresholds* thresholds_out = nullptr);

Thresholds load_thresholds(const std::string& path);

}  // namespace sde
