// sde: command-line audit harness tying the pipeline together.
//
// Subcommands: validate, lint, run, judge, geometry, classify, compare,
// review, report. Exit 0 on success, 1 on findings or errors, 2 on usage
// errors. All artifacts are written to --out paths.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sde/actor.hpp"
#include "sde/chat_client.hpp"
#include "sde/classify.hpp"
#include "sde/compare.hpp"
#include "sde/error.hpp"
#include "sde/geometry.hpp"
#include "sde/judge.hpp"
#include "sde/report.hpp"
#include "sde/review.hpp"
#include "sde/suite.hpp"
#include "sde/util.hpp"

namespace {

using namespace sde;

void print_findings(const std::vector<Finding>& findings) {
  for (const auto& finding : findings)
    std::cout << (finding.severity == Severity::Error ? "error " : "warning ")
              << finding.code << " at " << finding.path << ": " << finding.message
              << "\n";
}

// Every --<input> path must already exist; a vanished artifact is a pipeline
// wiring problem, not an IO failure.
const std::string& input_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw SdeError(ErrorCode::MissingInput, path);
  return path;
}

Suite load_validated_suite(const std::string& path) {
  Suite suite = load_suite(input_file(path));
  const ValidationReport report = validate_suite(suite);
  if (!report.ok) {
    print_findings(report.findings);
    throw SdeError(ErrorCode::SchemaError,
                   path + " fails validation with " +
                       std::to_string(report.findings.size()) + " findings");
  }
  return suite;
}

void touch_manifest(const std::string& manifest_path, const std::string& kind,
                    const std::string& artifact_path,
                    const RunRecordSet* run = nullptr,
                    const std::string& readout = "",
                    bool fixed_timestamp = false) {
  if (manifest_path.empty()) return;
  RunManifest manifest;
  try {
    manifest = load_manifest(manifest_path);
  } catch (const SdeError& e) {
    if (e.code() != ErrorCode::IoError) throw;  // absent file starts fresh
  }
  if (run != nullptr) {
    manifest.run_id = run->run_id;
    manifest.suite_id = run->suite_id;
    manifest.suite_version = run->suite_version;
    manifest.actor_model = run->actor_config.model_name;
  }
  if (!readout.empty() &&
      std::find(manifest.readouts.begin(), manifest.readouts.end(), readout) ==
          manifest.readouts.end())
    manifest.readouts.push_back(readout);
  upsert_manifest_artifact(manifest, kind, artifact_path);
  manifest.created_at = fixed_timestamp ? kFixedTimestamp : utc_now_iso8601();
  save_manifest(manifest, manifest_path);
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& suite_path, const std::string& out_path) {
  const Suite suite = load_suite(input_file(suite_path));
  const ValidationReport report = validate_suite(suite);
  std::cout << report.family_count << " families / " << report.prompt_count
            << " prompts\n";
  print_findings(report.findings);
  if (!out_path.empty()) {
    nlohmann::json doc;
    doc["suite_id"] = suite.suite_id;
    doc["ok"] = report.ok;
    doc["family_count"] = report.family_count;
    doc["prompt_count"] = report.prompt_count;
    doc["finding_count"] = report.findings.size();
    nlohmann::json findings = nlohmann::json::array();
    for (const auto& finding : report.findings)
      findings.push_back({{"code", finding.code},
                          {"path", finding.path},
                          {"message", finding.message},
                          {"severity", finding.severity == Severity::Error
                                           ? "error"
                                           : "warning"}});
    doc["findings"] = std::move(findings);
    write_file(out_path, doc.dump(2) + "\n");
  }
  return report.ok ? 0 : 1;
}

int cmd_lint(const std::string& suite_path) {
  const Suite suite = load_validated_suite(suite_path);
  std::vector<Finding> findings;
  for (const auto& family : suite.families) {
    auto family_findings = lint_structural_projection(family);
    findings.insert(findings.end(), family_findings.begin(), family_findings.end());
  }
  print_findings(findings);
  std::cout << findings.size() << " lint findings over " << suite.families.size()
            << " families\n";
  return findings.empty() ? 0 : 1;
}

int cmd_run(const std::string& suite_path, ActorConfig config, long seed,
            const std::string& out_path, bool fixed_timestamp,
            const std::string& manifest_path) {
  const Suite suite = load_validated_suite(suite_path);
  if (config.stub_mode()) config.stub_seed = seed;

  std::unique_ptr<ChatClient> client;
  if (!config.stub_mode())
    client = make_http_chat_client(config.endpoint_url, config.request_timeout);

  RunOptions options;
  options.out_path = out_path;
  options.fixed_timestamp = fixed_timestamp;
  const RunRecordSet run = run_suite(suite, config, client.get(), options);
  std::cout << "run " << run.run_id << ": " << run.records.size()
            << " responses -> " << out_path << "\n";
  touch_manifest(manifest_path, "run", out_path, &run, "", fixed_timestamp);
  return 0;
}

int cmd_judge(const std::string& suite_path, const std::string& run_path,
              const std::string& readout_name, const std::string& judge_model,
              const std::string& endpoint, int concurrency, int max_retries,
              bool allow_partial, const std::string& out_path,
              const std::string& manifest_path, bool fixed_timestamp) {
  const Suite suite = load_validated_suite(suite_path);
  const RunRecordSet run = load_run(input_file(run_path), allow_partial);
  const ReadoutKind readout = readout_from_string(readout_name);

  std::unique_ptr<JudgeClient> client;
  if (endpoint == kStubEndpoint) {
    client = std::make_unique<ScriptedJudgeClient>();
  } else {
    client = std::make_unique<HttpJudgeClient>(
        make_http_chat_client(endpoint, 60.0), judge_model);
  }

  JudgeOptions options;
  options.judge_model = judge_model;
  options.concurrency_limit = concurrency;
  options.max_retries = max_retries;
  options.allow_partial = allow_partial;

  const VerdictSet verdicts = judge_run(run, suite, readout, *client, options);
  save_verdicts(verdicts, out_path);
  std::cout << to_string(readout) << ": " << verdicts.verdict_count()
            << " verdicts, " << verdicts.parse_failures.size()
            << " parse failures -> " << out_path << "\n";
  touch_manifest(manifest_path, "verdicts", out_path, &run, to_string(readout),
                 fixed_timestamp);
  return 0;
}

int cmd_geometry(const std::string& suite_path, const std::string& run_path,
                 const std::string& verdicts_path, const std::string& out_path,
                 const std::string& manifest_path, bool allow_partial,
                 bool fixed_timestamp) {
  const Suite suite = load_validated_suite(suite_path);
  const RunRecordSet run = load_run(input_file(run_path), allow_partial);
  const VerdictSet verdicts = load_verdicts(input_file(verdicts_path));
  if (verdicts.run_id != run.run_id)
    throw SdeError(ErrorCode::VersionMismatch,
                   "verdicts belong to run " + verdicts.run_id + ", not " +
                       run.run_id);

  const GeometryResult result = aggregate_geometry(verdicts, suite);
  print_findings(result.findings);
  const GeometrySummary summary = make_geometry_summary(
      result, verdicts, suite.suite_id, run.actor_config.model_name);
  save_geometry_summary(summary, out_path);
  std::cout << "layer means over " << summary.family_count
            << " families: surface " << render3(summary.surface_mean)
            << " / structural " << render3(summary.structural_mean)
            << " / conditional " << render3(summary.conditional_mean) << " -> "
            << out_path << "\n";
  touch_manifest(manifest_path, "geometry", out_path, nullptr, "", fixed_timestamp);
  return 0;
}

int cmd_classify(const std::string& geometry_path, const std::string& thresholds_path,
                 const std::string& out_path, const std::string& manifest_path,
                 bool fixed_timestamp) {
  const GeometrySummary summary = load_geometry_summary(input_file(geometry_path));
  Thresholds thresholds;
  if (!thresholds_path.empty()) thresholds = load_thresholds(input_file(thresholds_path));
  validate_thresholds(thresholds);

  std::vector<FamilyPattern> patterns;
  for (const auto& geometry : summary.family_geometries) {
    FamilyDiagnostics diag;
    auto it = summary.per_family_diag.find(geometry.family_id);
    if (it != summary.per_family_diag.end()) diag = it->second;
    patterns.push_back(classify_family(geometry, diag, thresholds));
  }
  PatternSummary pattern_summary = summarize_patterns(patterns);
  pattern_summary.run_id = summary.run_id;
  save_classification(pattern_summary, thresholds, out_path);
  std::cout << pattern_summary.overstated_count << " surface-only overstatements / "
            << pattern_summary.stable_count << " stable of "
            << pattern_summary.family_count << " families -> " << out_path << "\n";
  touch_manifest(manifest_path, "classification", out_path, nullptr, "",
                 fixed_timestamp);
  return 0;
}

std::vector<RunSummaryRef> load_refs(const std::vector<std::string>& paths,
                                     const std::vector<std::string>& labels) {
  std::vector<RunSummaryRef> refs;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const GeometrySummary summary = load_geometry_summary(input_file(paths[i]));
    refs.push_back(make_summary_ref(summary, i < labels.size() ? labels[i] : ""));
  }
  return refs;
}

int cmd_compare_readouts(const std::vector<std::string>& paths,
                         const std::vector<std::string>& labels,
                         const std::string& baseline, const std::string& out_path) {
  const GeometryComparison comparison =
      compare_readouts(load_refs(paths, labels), baseline);
  std::cout << render_comparison_table(comparison);
  if (!out_path.empty())
    write_file(out_path, serialize_comparison(comparison, "readouts"));
  return 0;
}

int cmd_compare_models(const std::vector<std::string>& paths,
                       const std::vector<std::string>& labels,
                       const std::string& out_path) {
  const GeometryComparison comparison = compare_models(load_refs(paths, labels));
  std::cout << render_comparison_table(comparison);
  if (!out_path.empty())
    write_file(out_path, serialize_comparison(comparison, "models"));
  return 0;
}

int cmd_compare_rewrite(const std::string& base_path, const std::string& rewrite_path,
                        std::vector<std::string> subset, double change_min,
                        const std::string& out_path) {
  const GeometrySummary base = load_geometry_summary(input_file(base_path));
  const GeometrySummary rewrite = load_geometry_summary(input_file(rewrite_path));
  if (subset.empty())
    for (const auto& geometry : base.family_geometries)
      subset.push_back(geometry.family_id);
  const RewriteDelta delta = structural_rewrite_delta(
      structural_values(base), structural_values(rewrite), subset, change_min);
  std::cout << render_rewrite_delta(delta);
  if (!out_path.empty()) write_file(out_path, serialize_rewrite_delta(delta));
  return 0;
}

int cmd_review(const std::string& review_path,
               const std::vector<std::string>& suite_paths,
               const std::string& out_path, const std::string& manifest_path,
               bool fixed_timestamp) {
  const std::vector<ReviewUnit> units = load_review(input_file(review_path));
  const ValidationReport report = validate_review(units);
  print_findings(report.findings);

  std::vector<Finding> coverage;
  if (!suite_paths.empty()) {
    // Review scope may span several suites; merge them for coverage checks.
    Suite merged;
    merged.suite_id = "review-scope";
    merged.kind = SuiteKind::Subset;
    for (const auto& path : suite_paths) {
      Suite suite = load_suite(input_file(path));
      if (suite_paths.size() == 1) merged.suite_id = suite.suite_id;
      for (auto& family : suite.families) merged.families.push_back(std::move(family));
    }
    coverage = review_coverage(units, merged);
    print_findings(coverage);
  }

  if (!report.ok) return 1;
  const ConsolidationSummary summary = consolidate(units);
  std::cout << "consolidation over " << summary.total()
            << " units: broad_support " << summary.broad_support
            << " / boundary_disagreement " << summary.boundary_disagreement
            << " / matrix_level " << summary.matrix_level << "\n";
  if (!out_path.empty()) {
    write_file(out_path, serialize_consolidation(summary));
    touch_manifest(manifest_path, "review", out_path, nullptr, "", fixed_timestamp);
  }
  return coverage.empty() ? 0 : 1;
}

int cmd_report(const std::string& manifest_path, const std::string& validate_suite_path,
               const std::vector<std::string>& geometry_paths,
               const std::string& classification_path,
               const std::vector<std::string>& comparison_paths,
               const std::string& rewrite_path, const std::string& review_path,
               const std::string& out_path, const std::string& text_path,
               bool fixed_timestamp) {
  ReportInputs inputs;
  inputs.fixed_timestamp = fixed_timestamp;

  if (!manifest_path.empty()) {
    RunManifest manifest = load_manifest(input_file(manifest_path));
    verify_manifest(manifest);
    inputs.manifest = std::move(manifest);
  }
  if (!validate_suite_path.empty()) {
    const Suite suite = load_suite(input_file(validate_suite_path));
    const ValidationReport report = validate_suite(suite);
    inputs.validation = SuiteShapeSummary{suite.suite_id, report.ok,
                                          report.family_count, report.prompt_count,
                                          static_cast<int>(report.findings.size())};
  }
  for (const auto& path : geometry_paths)
    inputs.geometries.push_back(load_geometry_summary(input_file(path)));
  if (!classification_path.empty()) {
    Thresholds thresholds;
    inputs.classification = load_classification(input_file(classification_path), &thresholds);
    inputs.thresholds = thresholds;
  }
  for (const auto& path : comparison_paths) {
    std::string mode;
    GeometryComparison comparison = load_comparison(input_file(path), &mode);
    inputs.comparisons.emplace_back(mode, std::move(comparison));
  }
  if (!rewrite_path.empty()) inputs.rewrite = load_rewrite_delta(input_file(rewrite_path));
  if (!review_path.empty()) inputs.review = load_consolidation(input_file(review_path));

  const AuditReport report = render_report(inputs);
  std::cout << report.text;
  if (!out_path.empty()) write_file(out_path, report.document);
  if (!text_path.empty()) write_file(text_path, report.text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sde: symmetry-decomposition audit harness"};
  app.require_subcommand(1);

  // validate
  std::string v_suite, v_out;
  auto* validate = app.add_subcommand("validate", "validate a suite file");
  validate->add_option("--suite", v_suite, "suite file")->required();
  validate->add_option("--out", v_out, "write validation summary JSON");

  // lint
  std::string l_suite;
  auto* lint = app.add_subcommand("lint", "structural projection lint");
  lint->add_option("--suite", l_suite, "suite file")->required();

  // run
  std::string r_suite, r_endpoint = kStubEndpoint, r_model, r_out, r_manifest;
  long r_seed = 0;
  bool r_fixed = false;
  ActorConfig r_config;
  auto* run = app.add_subcommand("run", "execute the suite against an actor");
  run->add_option("--suite", r_suite, "suite file")->required();
  run->add_option("--endpoint", r_endpoint, "chat endpoint URL or 'stub:'");
  run->add_option("--actor-model", r_model, "actor model name")->required();
  run->add_option("--seed", r_seed, "stub seed");
  run->add_option("--temperature", r_config.temperature, "sampling temperature");
  run->add_option("--max-tokens", r_config.max_output_tokens, "max output tokens");
  run->add_option("--timeout", r_config.request_timeout, "request timeout seconds");
  run->add_option("--max-retries", r_config.max_retries, "retries per prompt");
  run->add_option("--concurrency", r_config.concurrency_limit, "request fan-out");
  run->add_option("--out", r_out, "run record file")->required();
  run->add_option("--manifest", r_manifest, "manifest file to update");
  run->add_flag("--fixed-timestamp", r_fixed, "write fixed timestamps");

  // judge
  std::string j_suite, j_run, j_readout, j_model, j_endpoint = kStubEndpoint;
  std::string j_out, j_manifest;
  int j_concurrency = 4, j_retries = 1;
  bool j_partial = false, j_fixed = false;
  auto* judge = app.add_subcommand("judge", "score a run under a readout");
  judge->add_option("--suite", j_suite, "suite file")->required();
  judge->add_option("--run", j_run, "run record file")->required();
  judge
      ->add_option("--readout", j_readout,
                   "legacy_pas|pas_reason_anchor|paired_direct_stance")
      ->required();
  judge->add_option("--judge-model", j_model, "judge model name")->required();
  judge->add_option("--endpoint", j_endpoint, "judge endpoint URL or 'stub:'");
  judge->add_option("--concurrency", j_concurrency, "request fan-out");
  judge->add_option("--max-retries", j_retries, "transport retries");
  judge->add_flag("--allow-partial", j_partial, "judge an aborted run");
  judge->add_option("--out", j_out, "verdict file")->required();
  judge->add_option("--manifest", j_manifest, "manifest file to update");
  judge->add_flag("--fixed-timestamp", j_fixed, "write fixed timestamps");

  // geometry
  std::string g_suite, g_run, g_verdicts, g_out, g_manifest;
  bool g_partial = false, g_fixed = false;
  auto* geometry = app.add_subcommand("geometry", "aggregate verdicts");
  geometry->add_option("--suite", g_suite, "suite file")->required();
  geometry->add_option("--run", g_run, "run record file")->required();
  geometry->add_option("--verdicts", g_verdicts, "verdict file")->required();
  geometry->add_option("--out", g_out, "geometry summary file")->required();
  geometry->add_option("--manifest", g_manifest, "manifest file to update");
  geometry->add_flag("--allow-partial", g_partial, "accept aborted runs");
  geometry->add_flag("--fixed-timestamp", g_fixed, "write fixed timestamps");

  // classify
  std::string c_geometry, c_thresholds, c_out, c_manifest;
  bool c_fixed = false;
  auto* classify = app.add_subcommand("classify", "assign decomposition patterns");
  classify->add_option("--geometry", c_geometry, "geometry summary file")->required();
  classify->add_option("--thresholds", c_thresholds, "thresholds JSON file");
  classify->add_option("--out", c_out, "classification file")->required();
  classify->add_option("--manifest", c_manifest, "manifest file to update");
  classify->add_flag("--fixed-timestamp", c_fixed, "write fixed timestamps");

  // compare
  auto* compare = app.add_subcommand("compare", "compare layer geometry");
  compare->require_subcommand(1);
  std::vector<std::string> cr_summaries, cr_labels;
  std::string cr_baseline, cr_out;
  auto* readouts = compare->add_subcommand("readouts", "across readout regimes");
  readouts->add_option("--summary", cr_summaries, "geometry summary files")
      ->required();
  readouts->add_option("--label", cr_labels, "row labels (positional match)");
  readouts->add_option("--baseline", cr_baseline, "baseline row label")->required();
  readouts->add_option("--out", cr_out, "comparison JSON");

  std::vector<std::string> cm_summaries, cm_labels;
  std::string cm_out;
  auto* models = compare->add_subcommand("models", "across actor models");
  models->add_option("--summary", cm_summaries, "geometry summary files")
      ->required();
  models->add_option("--label", cm_labels, "row labels (positional match)");
  models->add_option("--out", cm_out, "comparison JSON");

  std::string cw_base, cw_rewrite, cw_out;
  std::vector<std::string> cw_subset;
  double cw_change_min = 0.5;
  auto* rewrite = compare->add_subcommand("rewrite", "structural-why rewrite delta");
  rewrite->add_option("--base", cw_base, "canonical geometry summary")->required();
  rewrite->add_option("--rewrite", cw_rewrite, "direct-why geometry summary")
      ->required();
  rewrite->add_option("--subset", cw_subset, "family ids (default: all in base)");
  rewrite->add_option("--change-min", cw_change_min, "change threshold");
  rewrite->add_option("--out", cw_out, "rewrite delta JSON");

  // review
  std::string rv_review, rv_out, rv_manifest;
  std::vector<std::string> rv_suites;
  bool rv_fixed = false;
  auto* review = app.add_subcommand("review", "consolidate second-reader records");
  review->add_option("--review", rv_review, "review record file")->required();
  review->add_option("--suite", rv_suites, "suite files for coverage checks");
  review->add_option("--out", rv_out, "consolidation JSON");
  review->add_option("--manifest", rv_manifest, "manifest file to update");
  review->add_flag("--fixed-timestamp", rv_fixed, "write fixed timestamps");

  // report
  std::string rp_manifest, rp_validate, rp_classification, rp_rewrite, rp_review;
  std::string rp_out, rp_text;
  std::vector<std::string> rp_geometries, rp_comparisons;
  bool rp_fixed = false;
  auto* report = app.add_subcommand("report", "render the audit report");
  report->add_option("--manifest", rp_manifest, "manifest file (verified)");
  report->add_option("--validate-suite", rp_validate, "suite to summarize");
  report->add_option("--geometry", rp_geometries, "geometry summary files")
      ->required();
  report->add_option("--classification", rp_classification, "classification file");
  report->add_option("--comparison", rp_comparisons, "comparison files");
  report->add_option("--rewrite", rp_rewrite, "rewrite delta file");
  report->add_option("--review", rp_review, "review consolidation file");
  report->add_option("--out", rp_out, "report JSON");
  report->add_option("--text", rp_text, "report text file");
  report->add_flag("--fixed-timestamp", rp_fixed, "render with fixed timestamp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(v_suite, v_out);
    if (lint->parsed()) return cmd_lint(l_suite);
    if (run->parsed()) {
      r_config.model_name = r_model;
      r_config.endpoint_url = r_endpoint;
      return cmd_run(r_suite, r_config, r_seed, r_out, r_fixed, r_manifest);
    }
    if (judge->parsed())
      return cmd_judge(j_suite, j_run, j_readout, j_model, j_endpoint,
                       j_concurrency, j_retries, j_partial, j_out, j_manifest,
                       j_fixed);
    if (geometry->parsed())
      return cmd_geometry(g_suite, g_run, g_verdicts, g_out, g_manifest,
                          g_partial, g_fixed);
    if (classify->parsed())
      return cmd_classify(c_geometry, c_thresholds, c_out, c_manifest, c_fixed);
    if (compare->parsed()) {
      if (readouts->parsed())
        return cmd_compare_readouts(cr_summaries, cr_labels, cr_baseline, cr_out);
      if (models->parsed())
        return cmd_compare_models(cm_summaries, cm_labels, cm_out);
      if (rewrite->parsed())
        return cmd_compare_rewrite(cw_base, cw_rewrite, cw_subset, cw_change_min,
                                   cw_out);
    }
    if (review->parsed())
      return cmd_review(rv_review, rv_suites, rv_out, rv_manifest, rv_fixed);
    if (report->parsed())
      return cmd_report(rp_manifest, rp_validate, rp_geometries, rp_classification,
                        rp_comparisons, rp_rewrite, rp_review, rp_out, rp_text,
                        rp_fixed);
  } catch (const SdeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
