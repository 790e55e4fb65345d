// Actor runner: executes a suite against a chat endpoint (or the
// deterministic stub) and persists one response per prompt record, in
// canonical order, with full run provenance.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sde/chat_client.hpp"
#include "sde/suite.hpp"

namespace sde {

// Stub mode is selected by the literal endpoint "stub:".
inline constexpr const char* kStubEndpoint = "stub:";

struct ActorConfig {
  std::string model_name;
  std::string endpoint_url;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  double request_timeout = 60.0;  // seconds
  int max_retries = 1;
  int concurrency_limit = 4;
  std::optional<long> stub_seed;

  bool stub_mode() const { return endpoint_url == kStubEndpoint; }
};

struct ResponseRecord {
  std::string prompt_id;
  std::string family_id;
  std::string run_id;
  std::string actor_model;
  std::string response_text;
  int attempt_count = 1;
  std::string started_at;
  std::string finished_at;
  // Cell provenance, kept so persisted runs can be re-ordered and paired
  // without reloading the suite.
  Layer layer = Layer::Surface;
  std::optional<Variant> variant;
  Side side = Side::A;
};

struct AbortMarker {
  std::string prompt_id;
  std::string family_id;
  int attempts = 0;
  std::string error;
};

struct RunRecordSet {
  std::string run_id;
  std::string suite_id;
  std::string suite_version;
  ActorConfig actor_config;
  std::string created_at;
  std::vector<ResponseRecord> records;  // canonical order
  std::vector<AbortMarker> aborted;

  bool complete() const { return aborted.empty(); }
};

struct RunOptions {
  std::string out_path;        // run persisted here before run_suite returns
  bool fixed_timestamp = false;
};

// Deterministic stub response: a templated text that names the record cell,
// echoes every condition axis_id, injects the planted side markers, and ends
// with a seed-dependent trace line (the only part that varies with the seed).
std::string stub_respond(const PromptRecord& record, long seed);

// Executes the whole suite. Requests fan out concurrently up to
// concurrency_limit; output ordering is canonical regardless of completion
// order. The run file is written before returning. If any prompt exhausts
// its retries the partial file is still written (with abort markers) and
// RUN_ABORTED is thrown for the first aborted prompt.
RunRecordSet run_suite(const Suite& suite, const ActorConfig& config,
                       ChatClient* client, const RunOptions& options);

void save_run(const RunRecordSet& run, const std::string& path);
RunRecordSet load_run(const std::string& path, bool allow_partial = false);

}  // namespace sde
