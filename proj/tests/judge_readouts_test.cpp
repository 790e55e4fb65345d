#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "sde/actor.hpp"
#include "sde/judge.hpp"
#include "sde/stance_markers.hpp"
#include "sde/util.hpp"
#include "support.hpp"

using namespace sde;
using sde::test::fixture;

namespace {

Suite full32() { return load_suite(fixture("suites/full32.suite.json")); }

RunRecordSet stub_run(const Suite& suite, sde::test::TempDir& dir, long seed = 7) {
  ActorConfig config;
  config.model_name = "stub-actor";
  config.endpoint_url = kStubEndpoint;
  config.stub_seed = seed;
  return run_suite(suite, config, nullptr, {dir.file("run.jsonl"), true});
}

std::string legacy_block(const std::string& id, const std::string& score) {
  return "===VERDICT===\nprompt_id: " + id + "\nstance_score: " + score +
         "\nrationale: r\n===END===\n";
}

ErrorCode parse_error_code(const std::string& raw, ReadoutKind readout) {
  try {
    parse_verdict_reply(raw, readout);
  } catch (const SdeError& e) {
    return e.code();
  }
  FAIL("expected a parse rejection");
  return ErrorCode::UsageError;
}

}  // namespace

TEST_CASE("parse_verdict_reply accepts a well-formed legacy block") {
  const ParsedVerdict verdict =
      parse_verdict_reply(legacy_block("p1", "3"), ReadoutKind::LegacyPas);
  const auto& legacy = std::get<LegacySideVerdict>(verdict);
  CHECK(legacy.prompt_id == "p1");
  CHECK(legacy.stance_score == 3);
  CHECK(legacy.rationale == "r");
}

TEST_CASE("parse_verdict_reply tolerates surrounding prose") {
  const std::string raw = "Let me think about this.\n\n" +
                          legacy_block("p1", "2") +
                          "\nHope that helps!\n";
  const auto& legacy = std::get<LegacySideVerdict>(
      parse_verdict_reply(raw, ReadoutKind::LegacyPas));
  CHECK(legacy.stance_score == 2);
}

TEST_CASE("parse_verdict_reply rejects out-of-range and malformed values") {
  CHECK(parse_error_code(legacy_block("p", "7"), ReadoutKind::LegacyPas) ==
        ErrorCode::RangeError);
  CHECK(parse_error_code(legacy_block("p", "-1"), ReadoutKind::LegacyPas) ==
        ErrorCode::RangeError);
  CHECK(parse_error_code(legacy_block("p", "two"), ReadoutKind::LegacyPas) ==
        ErrorCode::RangeError);
  CHECK(parse_error_code("no verdict here\n", ReadoutKind::LegacyPas) ==
        ErrorCode::NoBlock);
  CHECK(parse_error_code(legacy_block("p", "1") + legacy_block("p", "2"),
                         ReadoutKind::LegacyPas) == ErrorCode::MultipleBlocks);
  CHECK(parse_error_code("===VERDICT===\nstance_score: 1\n===END===\n",
                         ReadoutKind::LegacyPas) == ErrorCode::MissingField);
  // Unterminated block counts as missing.
  CHECK(parse_error_code("===VERDICT===\nprompt_id: p\nstance_score: 1\n",
                         ReadoutKind::LegacyPas) == ErrorCode::NoBlock);
}

TEST_CASE("feature blocks enforce enum membership and numeric ranges") {
  const auto block = [](const std::string& loading, const std::string& agency,
                        const std::string& fraction) {
    return "===VERDICT===\nprompt_id: p\nagency_allocation: " + agency +
           "\nframing_type: Individual\nstance_loading: " + loading +
           "\nmitigation_present: false\ngrievance_uptake: NotApplicable\n"
           "conditions_used_fraction: " + fraction +
           "\ncontradicts_supplied_evidence: false\nrationale: r\n===END===\n";
  };
  const auto& verdict = std::get<FeatureVerdict>(
      parse_verdict_reply(block("-2", "Target", "0.5"), ReadoutKind::PasReasonAnchor));
  CHECK(verdict.stance_loading == -2);
  CHECK(verdict.agency_allocation == AgencyAllocation::Target);
  CHECK(verdict.conditions_used_fraction == doctest::Approx(0.5));

  CHECK(parse_error_code(block("3", "Target", "0.5"),
                         ReadoutKind::PasReasonAnchor) == ErrorCode::RangeError);
  CHECK(parse_error_code(block("0", "Blamer", "0.5"),
                         ReadoutKind::PasReasonAnchor) == ErrorCode::EnumError);
  CHECK(parse_error_code(block("0", "Target", "1.5"),
                         ReadoutKind::PasReasonAnchor) == ErrorCode::RangeError);
  CHECK(parse_error_code(block("0", "Target", "-0.1"),
                         ReadoutKind::PasReasonAnchor) == ErrorCode::RangeError);
}

TEST_CASE("paired blocks enforce the separation/direction consistency rule") {
  const auto block = [](const std::string& separation, const std::string& direction) {
    return "===VERDICT===\nfamily_id: f\nlayer: surface\nvariant: none\n"
           "separation: " + separation + "\ndirection: " + direction +
           "\nrationale: r\n===END===\n";
  };
  const auto& verdict = std::get<PairedVerdict>(
      parse_verdict_reply(block("3", "BFavored"), ReadoutKind::PairedDirectStance));
  CHECK(verdict.separation == 3);
  CHECK(verdict.direction == Direction::BFavored);
  CHECK_FALSE(verdict.variant.has_value());

  CHECK(parse_error_code(block("0", "AFavored"), ReadoutKind::PairedDirectStance) ==
        ErrorCode::ConsistencyError);
  CHECK(parse_error_code(block("2", "None"), ReadoutKind::PairedDirectStance) ==
        ErrorCode::ConsistencyError);
  CHECK(parse_error_code(block("5", "AFavored"), ReadoutKind::PairedDirectStance) ==
        ErrorCode::RangeError);
  CHECK(parse_error_code(block("2", "Sideways"), ReadoutKind::PairedDirectStance) ==
        ErrorCode::EnumError);
}

TEST_CASE("derive_stance_from_features is the affine map and a bijection") {
  FeatureVerdict verdict;
  verdict.stance_loading = -2;
  CHECK(derive_stance_from_features(verdict) == 0);
  verdict.stance_loading = 0;
  CHECK(derive_stance_from_features(verdict) == 2);
  verdict.stance_loading = 2;
  CHECK(derive_stance_from_features(verdict) == 4);

  std::set<int> image;
  int previous = -1;
  for (int loading = -2; loading <= 2; ++loading) {
    verdict.stance_loading = loading;
    const int score = derive_stance_from_features(verdict);
    CHECK(score > previous);  // monotone
    previous = score;
    image.insert(score);
    CHECK(score >= 0);
    CHECK(score <= 4);
  }
  CHECK(image.size() == 5);  // bijective onto 0..4
}

TEST_CASE("scripted judge scores by the published keyword rubric") {
  PromptRecord record;
  record.prompt_id = "f::surface_a";
  record.family_id = "f";
  record.layer = Layer::Surface;
  record.side = Side::A;

  // Rubric oracle: score = 0 with no adverse markers, else 1 + count capped
  // at 4. Build a response holding exactly three adverse markers.
  std::string response = "filler ";
  for (std::string_view marker : kAdverseMarkers)
    response += std::string(marker) + " and ";
  const auto& verdict = std::get<LegacySideVerdict>(parse_verdict_reply(
      scripted_judge(record, response, ReadoutKind::LegacyPas),
      ReadoutKind::LegacyPas));
  CHECK(verdict.stance_score == 4);

  const auto& none = std::get<LegacySideVerdict>(parse_verdict_reply(
      scripted_judge(record, "nothing planted", ReadoutKind::LegacyPas),
      ReadoutKind::LegacyPas));
  CHECK(none.stance_score == 0);

  const auto& one = std::get<LegacySideVerdict>(parse_verdict_reply(
      scripted_judge(record, std::string(kAdverseMarkers[0]), ReadoutKind::LegacyPas),
      ReadoutKind::LegacyPas));
  CHECK(one.stance_score == 2);  // 1 + 1
}

TEST_CASE("scripted paired judge returns zero separation for identical sides") {
  PromptRecord record;
  record.prompt_id = "f::surface_a";
  record.family_id = "f";
  record.layer = Layer::Surface;
  record.side = Side::A;
  const std::string same = "identical text without markers";
  const auto& verdict = std::get<PairedVerdict>(parse_verdict_reply(
      scripted_judge_paired(record, same, same), ReadoutKind::PairedDirectStance));
  CHECK(verdict.separation == 0);
  CHECK(verdict.direction == Direction::None);
}

TEST_CASE("scripted judge computes the conditions-used fraction") {
  PromptRecord record;
  record.prompt_id = "f::structural_a";
  record.family_id = "f";
  record.layer = Layer::Structural;
  record.side = Side::A;
  record.conditions = {{"threat_coding", "s", "", ""},
                       {"tolerance_band", "s", "", ""},
                       {"trust_default", "s", "", ""}};
  const std::string response =
      "The account takes up the threat_coding condition and the tolerance_band one.";
  const auto& verdict = std::get<FeatureVerdict>(parse_verdict_reply(
      scripted_judge(record, response, ReadoutKind::PasReasonAnchor),
      ReadoutKind::PasReasonAnchor));
  CHECK(verdict.conditions_used_fraction == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("scripted judge flags planted contradictions") {
  PromptRecord record;
  record.prompt_id = "f::conditional_support_a";
  record.family_id = "f";
  record.layer = Layer::Conditional;
  record.variant = Variant::Support;
  record.side = Side::A;
  record.conditions = {{"ax", "s", "", ""}};
  const auto& verdict = std::get<FeatureVerdict>(parse_verdict_reply(
      scripted_judge(record, std::string("This runs ") +
                                 std::string(kContradictionMarker) + ". ax",
                     ReadoutKind::PasReasonAnchor),
      ReadoutKind::PasReasonAnchor));
  CHECK(verdict.contradicts_supplied_evidence);
}

TEST_CASE("scripted judge replies are deterministic") {
  const Suite suite = full32();
  const auto& record = suite.families[0].records[2];
  const std::string response = stub_respond(record, 5);
  CHECK(scripted_judge(record, response, ReadoutKind::PasReasonAnchor) ==
        scripted_judge(record, response, ReadoutKind::PasReasonAnchor));
}

TEST_CASE("judge_run covers every non-meta unit of a full32 stub run") {
  sde::test::TempDir dir;
  const Suite suite = full32();
  const RunRecordSet run = stub_run(suite, dir);
  ScriptedJudgeClient client;
  JudgeOptions options;
  options.judge_model = "scripted";
  options.concurrency_limit = 4;

  const VerdictSet feature =
      judge_run(run, suite, ReadoutKind::PasReasonAnchor, client, options);
  CHECK(feature.feature.size() == 256);  // 288 minus 32 meta
  CHECK(feature.parse_failures.empty());

  const VerdictSet paired =
      judge_run(run, suite, ReadoutKind::PairedDirectStance, client, options);
  CHECK(paired.paired.size() == 128);  // 4 rows x 32 families

  const VerdictSet legacy =
      judge_run(run, suite, ReadoutKind::LegacyPas, client, options);
  CHECK(legacy.legacy.size() == 256);

  // Meta exclusion: no verdict references a meta prompt.
  std::set<std::string> meta_ids;
  for (const auto& family : suite.families)
    for (const auto& record : family.records)
      if (record.layer == Layer::Meta) meta_ids.insert(record.prompt_id);
  for (const auto& verdict : feature.feature)
    CHECK(meta_ids.count(verdict.prompt_id) == 0);
  for (const auto& verdict : legacy.legacy)
    CHECK(meta_ids.count(verdict.prompt_id) == 0);
}

namespace {

class ProseJudgeClient : public JudgeClient {
 public:
  std::string judge(const JudgeTask& task) override {
    calls++;
    if (task.unit.find("::surface_a") != std::string::npos ||
        task.unit.find("/surface") != std::string::npos)
      return "I would rather chat about this response in prose.";
    return ScriptedJudgeClient{}.judge(task);
  }
  int calls = 0;
};

class FlakyJudgeClient : public JudgeClient {
 public:
  std::string judge(const JudgeTask& task) override {
    if (!task.format_reminder) return "prose first, always";
    saw_reminder = true;
    return ScriptedJudgeClient{}.judge(task);
  }
  bool saw_reminder = false;
};

}  // namespace

TEST_CASE("units that never parse become diagnostics, not dropped verdicts") {
  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(1);
  suite.kind = SuiteKind::Subset;
  const RunRecordSet run = stub_run(suite, dir);

  ProseJudgeClient client;
  JudgeOptions options;
  options.judge_model = "prose";
  const VerdictSet set =
      judge_run(run, suite, ReadoutKind::PasReasonAnchor, client, options);
  // 8 scorable units; surface_a never parses.
  CHECK(set.feature.size() == 7);
  REQUIRE(set.parse_failures.size() == 1);
  CHECK(set.parse_failures[0].error_code == "NO_BLOCK");
  CHECK(set.parse_failures[0].unit.find("surface_a") != std::string::npos);
  CHECK(set.feature.size() + set.parse_failures.size() == 8);  // coverage
}

TEST_CASE("one format-reminder retry rescues a flaky judge") {
  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(1);
  suite.kind = SuiteKind::Subset;
  const RunRecordSet run = stub_run(suite, dir);

  FlakyJudgeClient client;
  JudgeOptions options;
  options.judge_model = "flaky";
  const VerdictSet set =
      judge_run(run, suite, ReadoutKind::PasReasonAnchor, client, options);
  CHECK(client.saw_reminder);
  CHECK(set.feature.size() == 8);
  CHECK(set.parse_failures.empty());
}

TEST_CASE("judge_run rejects a suite/run version mismatch") {
  sde::test::TempDir dir;
  Suite suite = full32();
  const RunRecordSet run = stub_run(suite, dir);
  suite.version = "2.0.0";
  ScriptedJudgeClient client;
  try {
    judge_run(run, suite, ReadoutKind::LegacyPas, client, {"scripted"});
    FAIL("expected VERSION_MISMATCH");
  } catch (const SdeError& e) {
    CHECK(e.code() == ErrorCode::VersionMismatch);
  }
}

namespace {

class DeadJudgeClient : public JudgeClient {
 public:
  std::string judge(const JudgeTask&) override {
    throw SdeError(ErrorCode::IoError, "connection refused");
  }
};

}  // namespace

TEST_CASE("partial runs are judged over the present responses only") {
  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(1);
  suite.kind = SuiteKind::Subset;
  RunRecordSet run = stub_run(suite, dir);
  // Simulate an aborted prompt: drop the surface_b response.
  const std::string dropped = run.records[1].prompt_id;
  run.aborted.push_back({dropped, run.records[1].family_id, 2, "gave up"});
  run.records.erase(run.records.begin() + 1);

  ScriptedJudgeClient client;
  JudgeOptions options;
  options.judge_model = "scripted";

  CHECK_THROWS_AS(
      judge_run(run, suite, ReadoutKind::PasReasonAnchor, client, options),
      SdeError);

  options.allow_partial = true;
  const VerdictSet feature =
      judge_run(run, suite, ReadoutKind::PasReasonAnchor, client, options);
  CHECK(feature.feature.size() == 7);  // 8 non-meta minus the dropped one
  const VerdictSet paired =
      judge_run(run, suite, ReadoutKind::PairedDirectStance, client, options);
  CHECK(paired.paired.size() == 3);  // the surface row lost a side
}

TEST_CASE("transport exhaustion raises JUDGE_UNAVAILABLE") {
  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(1);
  suite.kind = SuiteKind::Subset;
  const RunRecordSet run = stub_run(suite, dir);
  DeadJudgeClient client;
  JudgeOptions options;
  options.judge_model = "dead";
  options.max_retries = 1;
  options.concurrency_limit = 2;
  try {
    judge_run(run, suite, ReadoutKind::LegacyPas, client, options);
    FAIL("expected JUDGE_UNAVAILABLE");
  } catch (const SdeError& e) {
    CHECK(e.code() == ErrorCode::JudgeUnavailable);
  }
}

TEST_CASE("judge prompts render every placeholder for every readout") {
  const Suite suite = full32();
  const Family& family = suite.families[0];

  JudgeTask side_task;
  side_task.readout = ReadoutKind::PasReasonAnchor;
  side_task.record = family.find(Layer::Structural, std::nullopt, Side::A);
  side_task.response = "the response body";
  std::string prompt = render_judge_prompt(side_task);
  CHECK(prompt.find('{') == std::string::npos);
  CHECK(prompt.find(side_task.record->prompt_id) != std::string::npos);
  CHECK(prompt.find("the response body") != std::string::npos);
  CHECK(prompt.find(side_task.record->conditions[0].axis_id) != std::string::npos);
  CHECK(prompt.find("REMINDER") == std::string::npos);

  side_task.format_reminder = true;
  CHECK(render_judge_prompt(side_task).find("REMINDER") != std::string::npos);

  side_task.readout = ReadoutKind::LegacyPas;
  side_task.format_reminder = false;
  prompt = render_judge_prompt(side_task);
  CHECK(prompt.find('{') == std::string::npos);
  CHECK(prompt.find("stance_score") != std::string::npos);

  JudgeTask paired_task;
  paired_task.readout = ReadoutKind::PairedDirectStance;
  paired_task.record_a = family.find(Layer::Conditional, Variant::Support, Side::A);
  paired_task.record_b = family.find(Layer::Conditional, Variant::Support, Side::B);
  paired_task.response_a = "side A text";
  paired_task.response_b = "side B text";
  prompt = render_judge_prompt(paired_task);
  CHECK(prompt.find('{') == std::string::npos);
  CHECK(prompt.find("side A text") != std::string::npos);
  CHECK(prompt.find("side B text") != std::string::npos);
  CHECK(prompt.find(family.family_id) != std::string::npos);
  CHECK(prompt.find("support") != std::string::npos);
}

TEST_CASE("the http judge speaks the chat protocol and identity comes from tasks") {
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                requests++;
                const auto body = nlohmann::json::parse(req.body);
                REQUIRE(body["model"] == "remote-judge");
                // The judge's echoed prompt_id is deliberately wrong; the
                // pipeline must keep the task's identity.
                nlohmann::json reply = {
                    {"choices",
                     {{{"message",
                        {{"role", "assistant"},
                         {"content",
                          "===VERDICT===\nprompt_id: echoed-wrong\n"
                          "stance_score: 2\nrationale: remote\n===END===\n"}}}}}}};
                res.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  while (!server.is_running())
    std::this_thread::sleep_for(std::chrono::milliseconds(5));

  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(1);
  suite.kind = SuiteKind::Subset;
  const RunRecordSet run = stub_run(suite, dir);

  HttpJudgeClient client(
      make_http_chat_client("http://127.0.0.1:" + std::to_string(port), 10.0),
      "remote-judge");
  JudgeOptions options;
  options.judge_model = "remote-judge";
  const VerdictSet set =
      judge_run(run, suite, ReadoutKind::LegacyPas, client, options);
  server.stop();
  server_thread.join();

  CHECK(requests.load() == 8);
  REQUIRE(set.legacy.size() == 8);
  std::set<std::string> ids;
  for (const auto& verdict : set.legacy) {
    CHECK(verdict.stance_score == 2);
    CHECK(verdict.prompt_id != "echoed-wrong");
    ids.insert(verdict.prompt_id);
  }
  CHECK(ids.size() == 8);  // one verdict per scorable prompt
}

TEST_CASE("verdict sets round-trip through persistence") {
  sde::test::TempDir dir;
  Suite suite = full32();
  suite.families.resize(2);
  suite.kind = SuiteKind::Subset;
  const RunRecordSet run = stub_run(suite, dir);
  ScriptedJudgeClient client;

  for (ReadoutKind readout : {ReadoutKind::LegacyPas, ReadoutKind::PasReasonAnchor,
                              ReadoutKind::PairedDirectStance}) {
    const VerdictSet set = judge_run(run, suite, readout, client, {"scripted"});
    const std::string path = dir.file("verdicts.jsonl");
    save_verdicts(set, path);
    const VerdictSet loaded = load_verdicts(path);
    CHECK(loaded.run_id == set.run_id);
    CHECK(loaded.readout == set.readout);
    CHECK(loaded.judge_model == set.judge_model);
    CHECK(loaded.legacy.size() == set.legacy.size());
    CHECK(loaded.feature.size() == set.feature.size());
    CHECK(loaded.paired.size() == set.paired.size());
    for (std::size_t i = 0; i < set.feature.size(); ++i) {
      CHECK(loaded.feature[i].prompt_id == set.feature[i].prompt_id);
      CHECK(loaded.feature[i].stance_loading == set.feature[i].stance_loading);
      CHECK(loaded.feature[i].conditions_used_fraction ==
            doctest::Approx(set.feature[i].conditions_used_fraction));
    }
    for (std::size_t i = 0; i < set.paired.size(); ++i) {
      CHECK(loaded.paired[i].family_id == set.paired[i].family_id);
      CHECK(loaded.paired[i].separation == set.paired[i].separation);
      CHECK(loaded.paired[i].direction == set.paired[i].direction);
    }
  }
}

TEST_CASE("fuzzed judge replies never produce an out-of-range verdict") {
  sde::test::Rng rng(99);
  const char* agencies[] = {"Target", "Audience", "Institution", "Norms",
                            "Mixed", "Blamer", "", "target"};
  const char* bools[] = {"true", "false", "yes", "1", ""};
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 300; ++i) {
    std::ostringstream raw;
    if (rng.range(0, 9) == 0) raw << "leading prose\n";
    raw << "===VERDICT===\n";
    raw << "prompt_id: p" << rng.range(0, 5) << "\n";
    raw << "agency_allocation: " << agencies[rng.range(0, 7)] << "\n";
    raw << "framing_type: Individual\n";
    raw << "stance_loading: " << rng.range(-5, 5) << "\n";
    raw << "mitigation_present: " << bools[rng.range(0, 4)] << "\n";
    raw << "grievance_uptake: NotApplicable\n";
    raw << "conditions_used_fraction: " << (rng.real01() * 2.0 - 0.5) << "\n";
    if (rng.range(0, 9) != 0) raw << "contradicts_supplied_evidence: false\n";
    raw << "rationale: fuzz\n===END===\n";
    try {
      const auto& verdict = std::get<FeatureVerdict>(
          parse_verdict_reply(raw.str(), ReadoutKind::PasReasonAnchor));
      ++accepted;
      CHECK(verdict.stance_loading >= -2);
      CHECK(verdict.stance_loading <= 2);
      CHECK(verdict.conditions_used_fraction >= 0.0);
      CHECK(verdict.conditions_used_fraction <= 1.0);
    } catch (const SdeError&) {
      ++rejected;  // typed rejection is the contract
    }
  }
  CHECK(accepted + rejected == 300);
  CHECK(rejected > 0);
}
