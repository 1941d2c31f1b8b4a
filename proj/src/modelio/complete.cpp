#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "modelio/modelio.hpp"
#include "util/error.hpp"

namespace mecw::model {

using nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Url split_url(const std::string& base) {
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  Url u;
  u.origin = base.substr(0, path_start);
  u.path = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

std::string provider_message(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (!doc.is_discarded() && doc.is_object() && doc.contains("error")) {
    const auto& err = doc["error"];
    if (err.is_object() && err.contains("message") && err["message"].is_string()) return err["message"].get<std::string>();
    if (err.is_string()) return err.get<std::string>();
  }
  return body.substr(0, 512);
}

std::optional<std::int64_t> usage_field(const json& doc, const char* key) {
  if (!doc.contains("usage") || !doc["usage"].is_object()) return std::nullopt;
  const auto& usage = doc["usage"];
  if (!usage.contains(key) || !usage[key].is_number_integer()) return std::nullopt;
  return usage[key].get<std::int64_t>();
}

CompletionResult fatal(std::string message) {
  CompletionResult r;
  r.transport_status = TransportStatus::fatal_failure;
  r.error = std::move(message);
  return r;
}

CompletionResult complete_live(const ModelEndpoint& endpoint, std::string_view system_instruction,
                               std::string_view user_prompt) {
  const char* key = endpoint.auth_env_var.empty() ? nullptr : std::getenv(endpoint.auth_env_var.c_str());
  if (key == nullptr || *key == '\0')
    return fatal("credential variable '" + endpoint.auth_env_var + "' is not set");

  json request = {{"model", endpoint.model_id},
                  {"messages",
                   {{{"role", "system"}, {"content", system_instruction}}, {{"role", "user"}, {"content", user_prompt}}}}};
  // Sampling parameters stay at provider defaults.
  if (endpoint.max_output_tokens) request["max_tokens"] = *endpoint.max_output_tokens;

  Url url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  auto timeout = std::chrono::duration<double>(endpoint.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

  auto started = std::chrono::steady_clock::now();
  auto response = client.Post(url.path + "/chat/completions", headers, request.dump(), "application/json");
  CompletionResult r;
  r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

  if (!response) {
    r.transport_status = TransportStatus::retryable_failure;
    r.error = "transport error: " + httplib::to_string(response.error());
    return r;
  }
  int status = response->status;
  if (status == 408 || status == 429 || status >= 500) {
    r.transport_status = TransportStatus::retryable_failure;
    r.error = "HTTP " + std::to_string(status) + ": " + provider_message(response->body);
    return r;
  }
  if (status < 200 || status >= 300) {
    auto f = fatal("HTTP " + std::to_string(status) + ": " + provider_message(response->body));
    f.latency_ms = r.latency_ms;
    return f;
  }
  json doc = json::parse(response->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    r.transport_status = TransportStatus::retryable_failure;
    r.error = "malformed provider response";
    return r;
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    r.text = content.is_string() ? content.get<std::string>() : std::string();
  } catch (const json::exception&) {
    r.transport_status = TransportStatus::retryable_failure;
    r.error = "provider response has no choices[0].message.content";
    return r;
  }
  r.prompt_tokens_reported = usage_field(doc, "prompt_tokens");
  r.completion_tokens_reported = usage_field(doc, "completion_tokens");
  r.transport_status = TransportStatus::ok;
  return r;
}

}  // namespace

CompletionResult complete(const ModelEndpoint& endpoint, std::string_view system_instruction,
                          std::string_view user_prompt, const SimulationContext* sim) {
  if (endpoint.simulated()) {
    if (sim == nullptr || sim->question == nullptr || sim->stream == nullptr)
      fail(ErrorCode::invalid_argument, "simulated endpoint '" + endpoint.model_id + "' needs a trial context");
    return simulate_complete(endpoint.simulation->for_task(sim->question->task), *sim->question, sim->prompt_tokens,
                             *sim->stream);
  }
  return complete_live(endpoint, system_instruction, user_prompt);
}

CompletionResult complete_with_retry(const ModelEndpoint& endpoint, std::string_view system_instruction,
                                     std::string_view user_prompt, const SimulationContext* sim,
                                     const RetryPolicy& policy) {
  auto backoff = policy.initial_backoff;
  CompletionResult r;
  for (int attempt = 0;; ++attempt) {
    r = complete(endpoint, system_instruction, user_prompt, sim);
    r.attempts = attempt + 1;
    if (r.transport_status != TransportStatus::retryable_failure || attempt >= policy.max_retries) return r;
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace mecw::model
