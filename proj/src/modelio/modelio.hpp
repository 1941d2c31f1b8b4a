#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tasks/tasks.hpp"
#include "util/rng.hpp"

namespace mecw::model {

// Correctness probability of the simulated model as a function of prompt size:
//   p(t) = p_low + (p_high - p_low) * logistic((t0 - t) / w)
struct DegradationProfile {
  double p_high = 1.0;
  double p_low = 0.0;
  std::int64_t t0 = 1;
  std::int64_t w = 1;

  double probability(double tokens) const;
  bool operator==(const DegradationProfile&) const = default;
};

void validate(const DegradationProfile& profile);
// "t0=1500,w=100,ph=0.98,pl=0.05"; ph defaults to 1 and pl to 0.
DegradationProfile parse_profile(std::string_view spec);
std::string format_profile(const DegradationProfile& profile);

struct SimulationSpec {
  DegradationProfile default_profile;
  std::map<tasks::TaskType, DegradationProfile> per_task;

  const DegradationProfile& for_task(tasks::TaskType task) const;
  bool operator==(const SimulationSpec&) const = default;
};

// Each entry is "<profile>" or "<task>:<profile>". An untagged entry sets the
// default; without one, the first tagged profile also serves as the default.
SimulationSpec parse_simulation(const std::vector<std::string>& profiles);

enum class RequestShape { chat_completions_v1, simulated };

struct ModelEndpoint {
  std::string model_id;
  std::string base_url;
  // Name of the environment variable holding the API key; the key itself is
  // never stored.
  std::string auth_env_var;
  RequestShape request_shape = RequestShape::chat_completions_v1;
  // Provider maximum output tokens. When unset the field is omitted from the
  // request and the provider applies its own ceiling.
  std::optional<std::int64_t> max_output_tokens;
  int max_concurrency = 4;
  double timeout_seconds = 120.0;
  std::optional<SimulationSpec> simulation;

  bool simulated() const { return request_shape == RequestShape::simulated; }
  bool operator==(const ModelEndpoint&) const = default;
};

ModelEndpoint simulated_endpoint(std::string model_id, SimulationSpec spec);

void validate(const ModelEndpoint& endpoint);
nlohmann::json to_json(const ModelEndpoint& endpoint);
ModelEndpoint endpoint_from_json(const nlohmann::json& doc);
// Provider config file: {"endpoints": [ ... ]}.
std::vector<ModelEndpoint> parse_endpoint_config(std::string_view json_text);
std::vector<ModelEndpoint> load_endpoint_config(const std::string& path);
// Names of credential variables that are unset or empty.
std::vector<std::string> missing_credentials(const std::vector<ModelEndpoint>& endpoints);

enum class TransportStatus { ok, retryable_failure, fatal_failure };
std::string_view to_string(TransportStatus status);

struct CompletionResult {
  std::string text;
  std::optional<std::int64_t> prompt_tokens_reported;
  std::optional<std::int64_t> completion_tokens_reported;
  std::int64_t latency_ms = 0;
  TransportStatus transport_status = TransportStatus::ok;
  std::string error;
  int attempts = 1;
};

enum class TokenSource { reported, estimated };
std::string_view to_string(TokenSource source);

struct TokenCount {
  std::int64_t value = 0;
  TokenSource source = TokenSource::estimated;
};

// Reported usage when present, else ceil(characters / 4).
TokenCount count_tokens(std::string_view text, std::optional<std::int64_t> reported);

// What a simulated endpoint needs to answer one trial.
struct SimulationContext {
  const tasks::QuestionInstance* question = nullptr;
  std::int64_t prompt_tokens = 0;
  rng::Stream* stream = nullptr;
};

CompletionResult simulate_complete(const DegradationProfile& profile, const tasks::QuestionInstance& question,
                                   std::int64_t prompt_tokens, rng::Stream& stream);

// One request. Simulated endpoints dispatch to simulate_complete and require
// `sim`; live endpoints issue a chat-completion call and ignore it.
CompletionResult complete(const ModelEndpoint& endpoint, std::string_view system_instruction,
                          std::string_view user_prompt, const SimulationContext* sim = nullptr);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

// Retries retryable failures with exponential backoff.
CompletionResult complete_with_retry(const ModelEndpoint& endpoint, std::string_view system_instruction,
                                     std::string_view user_prompt, const SimulationContext* sim,
                                     const RetryPolicy& policy);

}  // namespace mecw::model
