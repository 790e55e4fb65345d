#include "sde/actor.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sde/concurrency.hpp"
#include "sde/error.hpp"
#include "sde/stance_markers.hpp"
#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

std::string stub_respond(const PromptRecord& record, long seed) {
  std::ostringstream out;
  out << "[stub " << record.prompt_id << "] layer=" << to_string(record.layer);
  if (record.variant) out << " variant=" << to_string(*record.variant);
  out << " side=" << to_string(record.side) << "\n";

  for (const auto& condition : record.conditions)
    out << "The account takes up the " << condition.axis_id << " condition.\n";

  const PlantedCounts counts =
      planted_counts(record.prompt_id, record.layer, record.variant);
  if (record.side == Side::A) {
    for (int i = 0; i < counts.externalized; ++i)
      out << "Here the behaviour is " << kExternalizedMarkers[i % kExternalizedMarkers.size()]
          << ".\n";
  } else if (record.side == Side::B) {
    for (int i = 0; i < counts.adverse; ++i)
      out << "Here the judgment reflects a " << kAdverseMarkers[i % kAdverseMarkers.size()]
          << ".\n";
  }

  out << "seed-trace: "
      << content_digest(record.prompt_id + "#" + std::to_string(seed)) << "\n";
  return out.str();
}

namespace {

void check_config(const ActorConfig& config) {
  if (config.model_name.empty())
    throw SdeError(ErrorCode::ConfigError, "actor model_name is empty");
  if (config.endpoint_url.empty())
    throw SdeError(ErrorCode::ConfigError, "endpoint_url is empty");
  if (config.temperature < 0)
    throw SdeError(ErrorCode::ConfigError, "temperature must be >= 0");
  if (config.max_output_tokens <= 0)
    throw SdeError(ErrorCode::ConfigError, "max_output_tokens must be positive");
  if (config.concurrency_limit <= 0)
    throw SdeError(ErrorCode::ConfigError, "concurrency_limit must be positive");
  if (config.max_retries < 0)
    throw SdeError(ErrorCode::ConfigError, "max_retries must be >= 0");
}

std::string make_run_id(const Suite& suite, const ActorConfig& config,
                        bool fixed_timestamp) {
  std::string base = config.model_name + "-" + suite.suite_id;
  if (config.stub_mode())
    base += "-s" + std::to_string(config.stub_seed.value_or(0));
  if (!fixed_timestamp) base += "-" + utc_now_iso8601();
  return base;
}

}  // namespace

RunRecordSet run_suite(const Suite& suite, const ActorConfig& config,
                       ChatClient* client, const RunOptions& options) {
  check_config(config);
  if (!config.stub_mode() && client == nullptr)
    throw SdeError(ErrorCode::ConfigError, "non-stub run requires a chat client");
  if (options.out_path.empty())
    throw SdeError(ErrorCode::ConfigError, "run out_path is empty");

  // Canonical request order; completion order never shows in the output.
  std::vector<const PromptRecord*> prompts;
  for (const auto& family : suite.families)
    for (const auto& record : family.records) prompts.push_back(&record);
  std::sort(prompts.begin(), prompts.end(),
            [](const PromptRecord* a, const PromptRecord* b) {
              return record_order_less(*a, *b);
            });

  RunRecordSet run;
  run.run_id = make_run_id(suite, config, options.fixed_timestamp);
  run.suite_id = suite.suite_id;
  run.suite_version = suite.version;
  run.actor_config = config;
  run.created_at = options.fixed_timestamp ? kFixedTimestamp : utc_now_iso8601();

  struct Slot {
    std::optional<ResponseRecord> record;
    std::optional<AbortMarker> abort;
  };
  std::vector<Slot> slots(prompts.size());

  const long seed = config.stub_seed.value_or(0);

  parallel_for(prompts.size(), config.concurrency_limit, [&](std::size_t i) {
    const PromptRecord& prompt = *prompts[i];
    ResponseRecord record;
    record.prompt_id = prompt.prompt_id;
    record.family_id = prompt.family_id;
    record.run_id = run.run_id;
    record.actor_model = config.model_name;
    record.layer = prompt.layer;
    record.variant = prompt.variant;
    record.side = prompt.side;
    record.started_at = options.fixed_timestamp ? kFixedTimestamp : utc_now_iso8601();

    std::string last_error;
    for (int attempt = 1; attempt <= config.max_retries + 1; ++attempt) {
      record.attempt_count = attempt;
      try {
        if (config.stub_mode()) {
          record.response_text = stub_respond(prompt, seed);
        } else {
          ChatRequest request;
          request.model = config.model_name;
          request.messages = {{"user", prompt.text}};
          request.temperature = config.temperature;
          request.max_tokens = config.max_output_tokens;
          record.response_text = client->complete(request);
        }
        if (record.response_text.empty())
          throw SdeError(ErrorCode::IoError, "empty response body");
        record.finished_at =
            options.fixed_timestamp ? kFixedTimestamp : utc_now_iso8601();
        slots[i].record = std::move(record);
        return;
      } catch (const std::exception& e) {
        last_error = e.what();
        if (attempt <= config.max_retries)
          std::this_thread::sleep_for(
              std::chrono::milliseconds(250L << (attempt - 1)));
      }
    }
    slots[i].abort = AbortMarker{prompt.prompt_id, prompt.family_id,
                                 config.max_retries + 1, last_error};
  });

  for (auto& slot : slots) {
    if (slot.record) run.records.push_back(std::move(*slot.record));
    else run.aborted.push_back(std::move(*slot.abort));
  }

  save_run(run, options.out_path);

  if (!run.aborted.empty())
    throw SdeError(ErrorCode::RunAborted, run.aborted.front().prompt_id);
  return run;
}

namespace {

json actor_config_to_json(const ActorConfig& config) {
  json node;
  node["model_name"] = config.model_name;
  node["endpoint_url"] = config.endpoint_url;
  node["temperature"] = config.temperature;
  node["max_output_tokens"] = config.max_output_tokens;
  node["request_timeout"] = config.request_timeout;
  node["max_retries"] = config.max_retries;
  node["concurrency_limit"] = config.concurrency_limit;
  if (config.stub_seed) node["stub_seed"] = *config.stub_seed;
  return node;
}

ActorConfig actor_config_from_json(const json& node) {
  ActorConfig config;
  config.model_name = node.value("model_name", "");
  config.endpoint_url = node.value("endpoint_url", "");
  config.temperature = node.value("temperature", 0.0);
  config.max_output_tokens = node.value("max_output_tokens", 1024);
  config.request_timeout = node.value("request_timeout", 60.0);
  config.max_retries = node.value("max_retries", 1);
  config.concurrency_limit = node.value("concurrency_limit", 4);
  if (node.contains("stub_seed")) config.stub_seed = node["stub_seed"].get<long>();
  return config;
}

void sort_canonical(std::vector<ResponseRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const ResponseRecord& a, const ResponseRecord& b) {
              PromptRecord pa, pb;
              pa.family_id = a.family_id;
              pa.layer = a.layer;
              pa.variant = a.variant;
              pa.side = a.side;
              pb.family_id = b.family_id;
              pb.layer = b.layer;
              pb.variant = b.variant;
              pb.side = b.side;
              return record_order_less(pa, pb);
            });
}

}  // namespace

void save_run(const RunRecordSet& run, const std::string& path) {
  std::ostringstream out;
  json header;
  header["run_id"] = run.run_id;
  header["suite_id"] = run.suite_id;
  header["suite_version"] = run.suite_version;
  header["created_at"] = run.created_at;
  header["actor_config"] = actor_config_to_json(run.actor_config);
  out << header.dump() << "\n";

  for (const auto& record : run.records) {
    json node;
    node["prompt_id"] = record.prompt_id;
    node["family_id"] = record.family_id;
    node["run_id"] = record.run_id;
    node["actor_model"] = record.actor_model;
    node["response_text"] = record.response_text;
    node["attempt_count"] = record.attempt_count;
    node["started_at"] = record.started_at;
    node["finished_at"] = record.finished_at;
    node["layer"] = to_string(record.layer);
    if (record.variant) node["variant"] = to_string(*record.variant);
    node["side"] = to_string(record.side);
    out << node.dump() << "\n";
  }
  for (const auto& abort : run.aborted) {
    json node;
    node["abort"] = {{"prompt_id", abort.prompt_id},
                     {"family_id", abort.family_id},
                     {"attempts", abort.attempts},
                     {"error", abort.error}};
    out << node.dump() << "\n";
  }
  write_file(path, out.str());
}

RunRecordSet load_run(const std::string& path, bool allow_partial) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw SdeError(ErrorCode::ParseError, path + ": missing header line");

  RunRecordSet run;
  try {
    json header = json::parse(line);
    run.run_id = header.at("run_id").get<std::string>();
    run.suite_id = header.at("suite_id").get<std::string>();
    run.suite_version = header.at("suite_version").get<std::string>();
    run.created_at = header.value("created_at", "");
    run.actor_config = actor_config_from_json(header.at("actor_config"));
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::ParseError, path + " header: " + e.what());
  }

  std::size_t line_no = 1;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json node;
    try {
      node = json::parse(line);
    } catch (const json::exception& e) {
      throw SdeError(ErrorCode::ParseError,
                     path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (node.contains("abort")) {
        const json& a = node["abort"];
        run.aborted.push_back({a.at("prompt_id").get<std::string>(),
                               a.value("family_id", ""), a.value("attempts", 0),
                               a.value("error", "")});
        continue;
      }
      ResponseRecord record;
      record.prompt_id = node.at("prompt_id").get<std::string>();
      record.family_id = node.at("family_id").get<std::string>();
      record.run_id = node.at("run_id").get<std::string>();
      record.actor_model = node.at("actor_model").get<std::string>();
      record.response_text = node.at("response_text").get<std::string>();
      record.attempt_count = node.at("attempt_count").get<int>();
      record.started_at = node.value("started_at", "");
      record.finished_at = node.value("finished_at", "");
      record.layer = layer_from_string(node.at("layer").get<std::string>());
      if (node.contains("variant"))
        record.variant = variant_from_string(node["variant"].get<std::string>());
      record.side = side_from_string(node.at("side").get<std::string>());

      if (std::find(seen.begin(), seen.end(), record.prompt_id) != seen.end())
        throw SdeError(ErrorCode::ParseError,
                       path + ":" + std::to_string(line_no) +
                           ": DUPLICATE prompt_id " + record.prompt_id);
      seen.push_back(record.prompt_id);
      run.records.push_back(std::move(record));
    } catch (const json::exception& e) {
      throw SdeError(ErrorCode::ParseError,
                     path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (!run.aborted.empty() && !allow_partial)
    throw SdeError(ErrorCode::IncompleteRun,
                   path + " contains " + std::to_string(run.aborted.size()) +
                       " abort markers (use --allow-partial to load)");

  sort_canonical(run.records);
  return run;
}

}  // namespace sde
