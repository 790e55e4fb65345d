// Acceptance suite: one test case per release criterion, each printing a
// [PASS] line with the observed values when it completes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "sde/actor.hpp"
#include "sde/classify.hpp"
#include "sde/compare.hpp"
#include "sde/geometry.hpp"
#include "sde/judge.hpp"
#include "sde/review.hpp"
#include "sde/suite.hpp"
#include "sde/util.hpp"
#include "support.hpp"

using namespace sde;
using sde::test::fixture;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

TEST_CASE("C1 suite shape") {
  const auto start = std::chrono::steady_clock::now();

  const Suite full32 = load_suite(fixture("suites/full32.suite.json"));
  const ValidationReport full32_report = validate_suite(full32);
  REQUIRE(full32_report.ok);
  REQUIRE(full32_report.family_count == 32);
  REQUIRE(full32_report.prompt_count == 288);

  const Suite c20 = load_suite(fixture("suites/controversial20.suite.json"));
  const ValidationReport c20_report = validate_suite(c20);
  REQUIRE(c20_report.ok);
  REQUIRE(c20_report.family_count == 20);
  REQUIRE(c20_report.prompt_count == 180);

  const double elapsed = seconds_since(start);
  REQUIRE(elapsed < 1.0);
  std::printf("[PASS] C1 suite shape: full32 = 32 families / 288 prompts, "
              "controversial20 = 20 / 180 (%.3fs)\n", elapsed);
}

TEST_CASE("C2 projection lint") {
  const Suite seeded = load_suite(fixture("suites/lint_seeded.suite.json"));
  REQUIRE(validate_suite(seeded).ok);

  std::multiset<std::string> codes;
  for (const auto& family : seeded.families)
    for (const auto& finding : lint_structural_projection(family))
      codes.insert(finding.code);

  const std::multiset<std::string> expected = {"GROUP_LABEL_IN_STRUCTURAL",
                                               "DUPLICATE_AXIS",
                                               "CASE_EVIDENCE_IN_STRUCTURAL"};
  REQUIRE(codes == expected);
  std::printf("[PASS] C2 projection lint: seeded fixture -> exactly "
              "{GROUP_LABEL_IN_STRUCTURAL, DUPLICATE_AXIS, "
              "CASE_EVIDENCE_IN_STRUCTURAL}\n");
}

TEST_CASE("C3 geometry oracle") {
  const auto start = std::chrono::steady_clock::now();
  sde::test::Rng rng(2026);

  for (int trial = 0; trial < 200; ++trial) {
    const int family_count = rng.range(1, 40);
    struct RawScores {
      int surface_a, surface_b, structural_a, structural_b;
      int support_a, support_b, counter_a, counter_b;
    };
    std::vector<RawScores> raw(static_cast<std::size_t>(family_count));
    std::vector<FamilyGeometry> geometries;

    for (int f = 0; f < family_count; ++f) {
      RawScores& scores = raw[static_cast<std::size_t>(f)];
      scores = {rng.range(0, 4), rng.range(0, 4), rng.range(0, 4), rng.range(0, 4),
                rng.range(0, 4), rng.range(0, 4), rng.range(0, 4), rng.range(0, 4)};
      const std::string id = "f" + std::to_string(f);
      const std::vector<RowSeparation> rows = {
          row_separation(id, Layer::Surface, std::nullopt, scores.surface_a,
                         scores.surface_b),
          row_separation(id, Layer::Structural, std::nullopt, scores.structural_a,
                         scores.structural_b),
          row_separation(id, Layer::Conditional, Variant::Support, scores.support_a,
                         scores.support_b),
          row_separation(id, Layer::Conditional, Variant::Counter, scores.counter_a,
                         scores.counter_b),
      };
      geometries.push_back(family_geometry(rows));
    }

    const LayerGeometry means = layer_means(geometries);

    // Independent brute-force re-summation straight from the raw scores.
    double surface_sum = 0, structural_sum = 0, conditional_sum = 0;
    for (const RawScores& scores : raw) {
      surface_sum += std::abs(scores.surface_a - scores.surface_b);
      structural_sum += std::abs(scores.structural_a - scores.structural_b);
      conditional_sum += (std::abs(scores.support_a - scores.support_b) +
                          std::abs(scores.counter_a - scores.counter_b)) /
                         2.0;
    }
    REQUIRE(std::fabs(means.surface_mean - surface_sum / family_count) < 1e-9);
    REQUIRE(std::fabs(means.structural_mean - structural_sum / family_count) < 1e-9);
    REQUIRE(std::fabs(means.conditional_mean - conditional_sum / family_count) <
            1e-9);

    for (const FamilyGeometry& geometry : geometries) {
      REQUIRE(geometry.surface_pas == std::floor(geometry.surface_pas));
      REQUIRE(geometry.structural_pas == std::floor(geometry.structural_pas));
      REQUIRE(std::fmod(geometry.conditional_pas * 2.0, 1.0) == 0.0);
      REQUIRE(geometry.conditional_pas >= 0.0);
      REQUIRE(geometry.conditional_pas <= 4.0);
    }
  }

  const double elapsed = seconds_since(start);
  REQUIRE(elapsed < 5.0);
  std::printf("[PASS] C3 geometry oracle: 200 randomized fixtures match brute "
              "force within 1e-9; lattice invariants hold (%.3fs)\n", elapsed);
}

TEST_CASE("C4 published-summary echo") {
  struct Line {
    const char* file;
    const char* surface;
    const char* structural;
    const char* conditional;
  };
  const Line table1_and_3[] = {
      {"published_summaries/full32_gpt51_legacy_pas.json", "0.938", "0.531", "0.578"},
      {"published_summaries/full32_gpt51_pas_reason_anchor.json", "0.656", "0.938",
       "0.984"},
      {"published_summaries/full32_gpt5mini_pas_reason_anchor.json", "1.281", "1.219",
       "1.078"},
      {"published_summaries/full32_gpt51_paired_direct_stance.json", "0.344", "0.719",
       "0.516"},
  };
  for (const Line& line : table1_and_3) {
    const GeometrySummary summary = load_geometry_summary(fixture(line.file));
    REQUIRE(render3(summary.surface_mean) == line.surface);
    REQUIRE(render3(summary.structural_mean) == line.structural);
    REQUIRE(render3(summary.conditional_mean) == line.conditional);
  }

  const auto surface_of = [](const char* file) {
    return render3(load_geometry_summary(fixture(file)).surface_mean);
  };
  REQUIRE(surface_of("published_summaries/clean8_gpt51_pas_reason_anchor.json") ==
          "1.250");
  REQUIRE(surface_of("published_summaries/clean8_gpt51_paired_direct_stance.json") ==
          "0.000");
  REQUIRE(surface_of("published_summaries/clean8_gpt5mini_pas_reason_anchor.json") ==
          "1.125");
  REQUIRE(surface_of("published_summaries/clean8_gpt5mini_paired_direct_stance.json") ==
          "0.000");

  std::printf("[PASS] C4 published-summary echo: 0.938/0.531/0.578, "
              "0.656/0.938/0.984, 1.281/1.219/1.078, 0.344/0.719/0.516; clean8 "
              "collapse 1.250->0.000 and 1.125->0.000\n");
}

TEST_CASE("C5 classifier rules") {
  const auto geometry_of = [](double surface, double structural, double support,
                              double counter) {
    FamilyGeometry geometry;
    geometry.family_id = "f";
    geometry.surface_pas = surface;
    geometry.structural_pas = structural;
    geometry.support_pas = support;
    geometry.counter_pas = counter;
    geometry.conditional_pas = (support + counter) / 2.0;
    return geometry;
  };
  const FamilyDiagnostics clean{0.0, 1.0};
  const Thresholds thresholds;

  const FamilyPattern contraction =
      classify_family(geometry_of(2, 0.5, 0.5, 0.5), clean, thresholds);
  REQUIRE(contraction.decomposed_label == DecomposedLabel::StructuralContraction);
  REQUIRE(contraction.surface_only_overstates);

  const FamilyPattern low =
      classify_family(geometry_of(0.5, 0.5, 0.5, 0.5), clean, thresholds);
  REQUIRE(low.decomposed_label == DecomposedLabel::StableLow);
  REQUIRE(low.all_views_stable);

  const FamilyPattern signal =
      classify_family(geometry_of(2, 2, 2, 2), clean, thresholds);
  REQUIRE(signal.decomposed_label == DecomposedLabel::StableSignal);
  REQUIRE(signal.all_views_stable);
  REQUIRE_FALSE(signal.surface_only_overstates);

  // Threshold monotonicity over 1,000 fuzzed geometries.
  sde::test::Rng rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    const FamilyGeometry geometry =
        geometry_of(rng.range(0, 8) / 2.0, rng.range(0, 8) / 2.0, rng.range(0, 4),
                    rng.range(0, 4));
    Thresholds low_threshold;
    Thresholds high_threshold;
    high_threshold.contraction_min =
        low_threshold.contraction_min + rng.range(1, 6) / 2.0;
    const bool low_contracts =
        classify_family(geometry, clean, low_threshold).decomposed_label ==
        DecomposedLabel::StructuralContraction;
    const bool high_contracts =
        classify_family(geometry, clean, high_threshold).decomposed_label ==
        DecomposedLabel::StructuralContraction;
    REQUIRE((high_contracts ? low_contracts : true));
  }

  // Headline-shaped partition: 12 contraction + 20 stable -> (12, 20).
  std::vector<FamilyPattern> patterns;
  for (int i = 0; i < 32; ++i)
    patterns.push_back(classify_family(
        i < 12 ? geometry_of(3, 0.5, 1, 0) : geometry_of(0.5, 0.5, 0.5, 0.5),
        clean, thresholds));
  for (int i = 0; i < 32; ++i)
    patterns[static_cast<std::size_t>(i)].family_id = "f" + std::to_string(i);
  const PatternSummary summary = summarize_patterns(patterns);
  REQUIRE(summary.overstated_count == 12);
  REQUIRE(summary.stable_count == 20);

  std::printf("[PASS] C5 classifier rules: forced labels hold; monotonicity over "
              "1000 fuzzed geometries; constructed partition -> (12, 20)\n");
}

TEST_CASE("C6 structural-why delta") {
  std::map<std::string, double> base, rewrite;
  std::vector<std::string> subset;
  for (int i = 1; i <= 8; ++i) {
    const std::string id = "f" + std::to_string(i);
    subset.push_back(id);
    base[id] = 1.0;
    rewrite[id] = 1.0;
  }
  rewrite["f1"] = 2.0;  // shifts by 1.0
  rewrite["f2"] = 0.0;  // shifts by 1.0

  const RewriteDelta delta = structural_rewrite_delta(base, rewrite, subset, 0.5);
  REQUIRE(delta.changed_count == 2);
  REQUIRE(delta.pairs.size() == 8);

  const RewriteDelta identity = structural_rewrite_delta(base, base, subset, 0.5);
  REQUIRE(identity.changed_count == 0);

  std::printf("[PASS] C6 structural-why delta: shifted fixture -> 2/8, identity "
              "-> 0/8 at change_min 0.5\n");
}

TEST_CASE("C7 review consolidation") {
  const auto units = load_review(fixture("reviews/second_reader_20.json"));
  REQUIRE(units.size() == 20);
  REQUIRE(validate_review(units).ok);
  const ConsolidationSummary summary = consolidate(units);
  REQUIRE(summary.broad_support == 8);
  REQUIRE(summary.boundary_disagreement == 6);
  REQUIRE(summary.matrix_level == 6);
  std::printf("[PASS] C7 review consolidation: shipped 20-unit record -> "
              "{8, 6, 6}\n");
}

namespace {

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

// One full offline pipeline through the installed CLI, using relative
// artifact paths so two work directories produce comparable bytes.
double run_pipeline(const std::string& dir) {
  const std::string cli = sde::test::cli_path();
  const std::string suite = fixture("suites/full32.suite.json");
  const auto start = std::chrono::steady_clock::now();
  const std::string prefix = "cd " + dir + " && " + cli + " ";
  REQUIRE(shell(prefix + "validate --suite " + suite + " >/dev/null") == 0);
  REQUIRE(shell(prefix + "run --suite " + suite +
                " --actor-model stub-actor --seed 7 --out run.jsonl"
                " --manifest manifest.json --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "judge --suite " + suite +
                " --run run.jsonl --readout pas_reason_anchor"
                " --judge-model scripted --out verdicts_feature.jsonl"
                " --manifest manifest.json --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "judge --suite " + suite +
                " --run run.jsonl --readout paired_direct_stance"
                " --judge-model scripted --out verdicts_paired.jsonl"
                " --manifest manifest.json --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "geometry --suite " + suite +
                " --run run.jsonl --verdicts verdicts_feature.jsonl"
                " --out geometry_feature.json --manifest manifest.json"
                " --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "geometry --suite " + suite +
                " --run run.jsonl --verdicts verdicts_paired.jsonl"
                " --out geometry_paired.json --manifest manifest.json"
                " --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "classify --geometry geometry_feature.json"
                " --out classification.json --manifest manifest.json"
                " --fixed-timestamp >/dev/null") == 0);
  REQUIRE(shell(prefix + "report --manifest manifest.json"
                " --geometry geometry_feature.json --geometry geometry_paired.json"
                " --classification classification.json --out report.json"
                " --text report.txt --fixed-timestamp >/dev/null") == 0);
  return seconds_since(start);
}

}  // namespace

TEST_CASE("C8 end-to-end determinism") {
  sde::test::TempDir first;
  sde::test::TempDir second;
  const double first_elapsed = run_pipeline(first.path());
  const double second_elapsed = run_pipeline(second.path());
  REQUIRE(first_elapsed < 60.0);
  REQUIRE(second_elapsed < 60.0);

  REQUIRE(read_file(first.file("report.json")) ==
          read_file(second.file("report.json")));
  REQUIRE(read_file(first.file("report.txt")) ==
          read_file(second.file("report.txt")));
  // Every intermediate artifact is byte-identical too.
  for (const char* name : {"run.jsonl", "verdicts_feature.jsonl",
                           "verdicts_paired.jsonl", "geometry_feature.json",
                           "geometry_paired.json", "classification.json",
                           "manifest.json"})
    REQUIRE(read_file(first.file(name)) == read_file(second.file(name)));

  const VerdictSet feature = load_verdicts(first.file("verdicts_feature.jsonl"));
  REQUIRE(feature.feature.size() == 256);
  const VerdictSet paired = load_verdicts(first.file("verdicts_paired.jsonl"));
  REQUIRE(paired.paired.size() == 128);

  std::printf("[PASS] C8 end-to-end determinism: two pipeline runs byte-identical "
              "(%.1fs / %.1fs); coverage 256 feature + 128 paired\n",
              first_elapsed, second_elapsed);
}

TEST_CASE("C9 parse robustness") {
  sde::test::Rng rng(424242);
  sde::test::TempDir dir;

  const char* agencies[] = {"Target", "Audience", "Institution", "Norms",
                            "Mixed",  "Blamer",   "TARGET",      ""};
  const char* framings[] = {"Individual", "Situational", "Perceptual",
                            "Structural", "Stereotype",  "Vibes"};
  const char* grievances[] = {"Reasonable", "Excessive", "Strategic",
                              "Emotional",  "NotApplicable", "Whatever"};
  const char* directions[] = {"AFavored", "BFavored", "None", "Both", ""};
  const char* bools[] = {"true", "false", "yes", "no", "1", ""};

  VerdictSet survivors;
  survivors.run_id = "fuzz";
  survivors.readout = ReadoutKind::PasReasonAnchor;
  survivors.judge_model = "fuzz";
  VerdictSet paired_survivors;
  paired_survivors.run_id = "fuzz";
  paired_survivors.readout = ReadoutKind::PairedDirectStance;
  paired_survivors.judge_model = "fuzz";

  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int flavor = trial % 3;
    std::ostringstream raw;
    if (rng.range(0, 4) == 0) raw << "Some prose before the verdict.\n";
    const bool omit_open = rng.range(0, 19) == 0;
    const bool omit_close = rng.range(0, 19) == 0;
    const bool doubled = rng.range(0, 24) == 0;
    if (!omit_open) raw << "===VERDICT===\n";

    if (flavor == 0) {
      raw << "prompt_id: p" << trial << "\n";
      if (rng.range(0, 9) != 0)
        raw << "stance_score: " << rng.range(-3, 9) << "\n";
      raw << "rationale: fuzz\n";
    } else if (flavor == 1) {
      raw << "prompt_id: p" << trial << "\n";
      raw << "agency_allocation: " << agencies[rng.range(0, 7)] << "\n";
      raw << "framing_type: " << framings[rng.range(0, 5)] << "\n";
      raw << "stance_loading: " << rng.range(-4, 4) << "\n";
      raw << "mitigation_present: " << bools[rng.range(0, 5)] << "\n";
      raw << "grievance_uptake: " << grievances[rng.range(0, 5)] << "\n";
      raw << "conditions_used_fraction: " << (rng.real01() * 1.6 - 0.3) << "\n";
      raw << "contradicts_supplied_evidence: " << bools[rng.range(0, 5)] << "\n";
    } else {
      raw << "family_id: fam" << trial << "\n";
      raw << "layer: " << (rng.range(0, 5) == 0 ? "sideways" : "surface") << "\n";
      raw << "variant: none\n";
      raw << "separation: " << rng.range(-1, 6) << "\n";
      raw << "direction: " << directions[rng.range(0, 4)] << "\n";
    }
    if (!omit_close) raw << "===END===\n";
    if (doubled) raw << "===VERDICT===\nprompt_id: again\n===END===\n";

    const ReadoutKind readout = flavor == 0   ? ReadoutKind::LegacyPas
                                : flavor == 1 ? ReadoutKind::PasReasonAnchor
                                              : ReadoutKind::PairedDirectStance;
    try {
      const ParsedVerdict verdict = parse_verdict_reply(raw.str(), readout);
      ++accepted;
      if (const auto* legacy = std::get_if<LegacySideVerdict>(&verdict)) {
        REQUIRE(legacy->stance_score >= 0);
        REQUIRE(legacy->stance_score <= 4);
      } else if (const auto* feature = std::get_if<FeatureVerdict>(&verdict)) {
        REQUIRE(feature->stance_loading >= -2);
        REQUIRE(feature->stance_loading <= 2);
        REQUIRE(feature->conditions_used_fraction >= 0.0);
        REQUIRE(feature->conditions_used_fraction <= 1.0);
        survivors.feature.push_back(*feature);
      } else if (const auto* paired = std::get_if<PairedVerdict>(&verdict)) {
        REQUIRE(paired->separation >= 0);
        REQUIRE(paired->separation <= 4);
        REQUIRE(((paired->separation == 0) == (paired->direction == Direction::None)));
        paired_survivors.paired.push_back(*paired);
      }
    } catch (const SdeError& e) {
      ++rejected;
      const ErrorCode code = e.code();
      REQUIRE((code == ErrorCode::NoBlock || code == ErrorCode::MultipleBlocks ||
               code == ErrorCode::MissingField || code == ErrorCode::RangeError ||
               code == ErrorCode::EnumError ||
               code == ErrorCode::ConsistencyError));
    }
  }
  REQUIRE(accepted + rejected == 500);
  REQUIRE(rejected > 0);
  REQUIRE(accepted > 0);

  // Nothing out of range survives persistence either.
  save_verdicts(survivors, dir.file("fuzz_feature.jsonl"));
  const VerdictSet reloaded = load_verdicts(dir.file("fuzz_feature.jsonl"));
  for (const auto& verdict : reloaded.feature) {
    REQUIRE(verdict.stance_loading >= -2);
    REQUIRE(verdict.stance_loading <= 2);
    REQUIRE(verdict.conditions_used_fraction >= 0.0);
    REQUIRE(verdict.conditions_used_fraction <= 1.0);
  }
  save_verdicts(paired_survivors, dir.file("fuzz_paired.jsonl"));
  for (const auto& verdict : load_verdicts(dir.file("fuzz_paired.jsonl")).paired) {
    REQUIRE(verdict.separation >= 0);
    REQUIRE(verdict.separation <= 4);
  }

  std::printf("[PASS] C9 parse robustness: 500 fuzzed replies -> %d accepted "
              "in-range, %d rejected with typed errors; persistence stays "
              "in-range\n", accepted, rejected);
}
