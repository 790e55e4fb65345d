#include <cstdlib>
#include <fstream>
#include <string>

#include <doctest.h>

#include "sde/classify.hpp"
#include "sde/report.hpp"
#include "sde/util.hpp"
#include "support.hpp"

using namespace sde;
using sde::test::fixture;

namespace {

GeometrySummary sample_geometry(int families = 4) {
  GeometrySummary summary;
  summary.run_id = "run-x";
  summary.suite_id = "suite-x";
  summary.actor_model = "actor-x";
  summary.readout = ReadoutKind::PasReasonAnchor;
  summary.judge_model = "judge-x";
  summary.family_count = families;
  summary.surface_mean = 1.0;
  summary.structural_mean = 0.5;
  summary.conditional_mean = 0.25;
  for (int i = 0; i < families; ++i)
    summary.family_geometries.push_back(
        {"family_" + std::to_string(i), 2, 1, 1.5, 2, 1});
  return summary;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  sde::test::TempDir dir;
  const std::string out_file = dir.file("cli_output.txt");
  const std::string command =
      sde::test::cli_path() + " " + args + " >" + out_file + " 2>&1";
  const int status = std::system(command.c_str());
  if (output != nullptr) *output = read_file(out_file);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("render_report is byte-deterministic under a fixed timestamp") {
  ReportInputs inputs;
  inputs.fixed_timestamp = true;
  inputs.geometries.push_back(sample_geometry());
  const AuditReport first = render_report(inputs);
  const AuditReport second = render_report(inputs);
  CHECK(first.document == second.document);
  CHECK(first.text == second.text);
}

TEST_CASE("the report drills down one row per family") {
  ReportInputs inputs;
  inputs.fixed_timestamp = true;
  inputs.geometries.push_back(sample_geometry(32));
  const AuditReport report = render_report(inputs);
  int rows = 0;
  std::size_t pos = 0;
  while ((pos = report.text.find("family_", pos)) != std::string::npos) {
    ++rows;
    pos += 7;
  }
  CHECK(rows == 32);
}

TEST_CASE("a report without geometry is refused") {
  ReportInputs inputs;
  try {
    render_report(inputs);
    FAIL("expected MISSING_SECTION");
  } catch (const SdeError& e) {
    CHECK(e.code() == ErrorCode::MissingSection);
    CHECK(e.detail() == "geometry");
  }
}

TEST_CASE("manifest round-trip and integrity verification") {
  sde::test::TempDir dir;
  write_file(dir.file("artifact.txt"), "payload v1\n");

  RunManifest manifest;
  manifest.run_id = "run-1";
  manifest.suite_id = "suite-1";
  manifest.suite_version = "1.0.0";
  manifest.actor_model = "actor";
  manifest.readouts = {"pas_reason_anchor"};
  upsert_manifest_artifact(manifest, "run", dir.file("artifact.txt"));
  manifest.created_at = kFixedTimestamp;
  save_manifest(manifest, dir.file("manifest.json"));

  const RunManifest loaded = load_manifest(dir.file("manifest.json"));
  CHECK(loaded.run_id == "run-1");
  REQUIRE(loaded.artifacts.size() == 1);
  CHECK(loaded.artifacts[0].kind == "run");
  CHECK_NOTHROW(verify_manifest(loaded));

  // Upsert replaces rather than duplicates.
  RunManifest again = loaded;
  upsert_manifest_artifact(again, "run", dir.file("artifact.txt"));
  CHECK(again.artifacts.size() == 1);

  write_file(dir.file("artifact.txt"), "payload v2 tampered\n");
  try {
    verify_manifest(loaded);
    FAIL("expected INTEGRITY_ERROR");
  } catch (const SdeError& e) {
    CHECK(e.code() == ErrorCode::IntegrityError);
  }

  std::remove(dir.file("artifact.txt").c_str());
  try {
    verify_manifest(loaded);
    FAIL("expected INTEGRITY_ERROR for missing artifact");
  } catch (const SdeError& e) {
    CHECK(e.code() == ErrorCode::IntegrityError);
  }
}

TEST_CASE("cli: validate prints the suite shape and exits 0") {
  std::string output;
  const int status =
      run_cli("validate --suite " + fixture("suites/full32.suite.json"), &output);
  CHECK(status == 0);
  CHECK(output.find("32 families / 288 prompts") != std::string::npos);
}

TEST_CASE("cli: an unknown subcommand is a usage error (exit 2)") {
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("") == 2);
}

TEST_CASE("cli: missing inputs exit 1 with MISSING_INPUT") {
  std::string output;
  const int status =
      run_cli("classify --geometry /does/not/exist.json --out /tmp/x.json", &output);
  CHECK(status == 1);
  CHECK(output.find("MISSING_INPUT") != std::string::npos);
}

TEST_CASE("cli: compare readouts and rewrite produce documents report can embed") {
  sde::test::TempDir dir;
  std::string output;
  int status = run_cli(
      "compare readouts --summary " +
          fixture("published_summaries/full32_gpt51_legacy_pas.json") + " --summary " +
          fixture("published_summaries/full32_gpt51_paired_direct_stance.json") +
          " --label legacy_pas --label paired_direct_stance"
          " --baseline legacy_pas --out " + dir.file("cmp.json"),
      &output);
  CHECK(status == 0);
  CHECK(output.find("-0.594") != std::string::npos);

  // Rewrite delta over two copies of the same published summary: 0 changed.
  status = run_cli("compare rewrite --base " +
                       fixture("published_summaries/full32_gpt51_legacy_pas.json") +
                       " --rewrite " +
                       fixture("published_summaries/full32_gpt51_legacy_pas.json") +
                       " --out " + dir.file("rw.json"),
                   &output);
  CHECK(status == 0);

  status = run_cli("report --geometry " +
                       fixture("published_summaries/full32_gpt51_legacy_pas.json") +
                       " --comparison " + dir.file("cmp.json") +
                       " --fixed-timestamp --out " + dir.file("report.json"),
                   &output);
  CHECK(status == 0);
  CHECK(output.find("comparison (readouts)") != std::string::npos);
}

TEST_CASE("cli: lint reports seeded violations with exit 1") {
  std::string output;
  const int status =
      run_cli("lint --suite " + fixture("suites/lint_seeded.suite.json"), &output);
  CHECK(status == 1);
  CHECK(output.find("GROUP_LABEL_IN_STRUCTURAL") != std::string::npos);
  CHECK(output.find("DUPLICATE_AXIS") != std::string::npos);
  CHECK(output.find("CASE_EVIDENCE_IN_STRUCTURAL") != std::string::npos);
}

TEST_CASE("cli: a validation failure exits 1") {
  sde::test::TempDir dir;
  // Truncate the suite to break the full32 family count.
  std::string text = read_file(fixture("suites/full32.suite.json"));
  Suite suite = parse_suite(text, "mem");
  suite.families.resize(5);
  write_file(dir.file("broken.json"), serialize_suite(suite));
  std::string output;
  CHECK(run_cli("validate --suite " + dir.file("broken.json"), &output) == 1);
  CHECK(output.find("WRONG_FAMILY_COUNT") != std::string::npos);
}
