#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "modelio/modelio.hpp"
#include "util/error.hpp"

namespace mecw::model {

using nlohmann::json;

namespace {

std::string_view shape_name(RequestShape shape) {
  return shape == RequestShape::simulated ? "simulated" : "chat_completions_v1";
}

json profile_json(const DegradationProfile& p) {
  return {{"t0", p.t0}, {"w", p.w}, {"p_high", p.p_high}, {"p_low", p.p_low}};
}

DegradationProfile profile_from(const json& v) {
  if (v.is_string()) return parse_profile(v.get<std::string>());
  if (!v.is_object()) fail(ErrorCode::invalid_argument, "endpoint: profile must be a string or object");
  DegradationProfile p;
  p.t0 = v.at("t0").get<std::int64_t>();
  p.w = v.at("w").get<std::int64_t>();
  p.p_high = v.value("p_high", 1.0);
  p.p_low = v.value("p_low", 0.0);
  validate(p);
  return p;
}

}  // namespace

ModelEndpoint simulated_endpoint(std::string model_id, SimulationSpec spec) {
  ModelEndpoint e;
  e.model_id = std::move(model_id);
  e.base_url = "sim://local";
  e.request_shape = RequestShape::simulated;
  e.simulation = std::move(spec);
  validate(e);
  return e;
}

void validate(const ModelEndpoint& e) {
  if (e.model_id.empty()) fail(ErrorCode::invalid_argument, "endpoint: model_id is required");
  if (e.max_concurrency < 1) fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': max_concurrency must be >= 1");
  if (e.simulated()) {
    if (!e.simulation) fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': simulated endpoint needs a profile");
    validate(e.simulation->default_profile);
    for (const auto& [task, p] : e.simulation->per_task) validate(p);
    return;
  }
  if (e.base_url.rfind("http://", 0) != 0 && e.base_url.rfind("https://", 0) != 0)
    fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': base_url must start with http:// or https://");
  if (e.auth_env_var.empty())
    fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': auth_env_var is required");
  if (e.max_output_tokens && *e.max_output_tokens <= 0)
    fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': max_output_tokens must be positive");
  if (!(e.timeout_seconds > 0)) fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': timeout must be positive");
}

json to_json(const ModelEndpoint& e) {
  json out = {{"model_id", e.model_id},
              {"base_url", e.base_url},
              {"auth_env_var", e.auth_env_var},
              {"request_shape", shape_name(e.request_shape)},
              {"max_concurrency", e.max_concurrency},
              {"timeout_seconds", e.timeout_seconds}};
  out["max_output_tokens"] = e.max_output_tokens ? json(*e.max_output_tokens) : json(nullptr);
  if (e.simulation) {
    out["profile"] = profile_json(e.simulation->default_profile);
    json per_task = json::object();
    for (const auto& [task, p] : e.simulation->per_task) per_task[std::string(tasks::to_string(task))] = profile_json(p);
    out["task_profiles"] = per_task;
  }
  return out;
}

ModelEndpoint endpoint_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::invalid_argument, "endpoint: entry must be an object");
  try {
    ModelEndpoint e;
    e.model_id = doc.at("model_id").get<std::string>();
    std::string shape = doc.value("request_shape", std::string("chat_completions_v1"));
    if (shape == "simulated") e.request_shape = RequestShape::simulated;
    else if (shape == "chat_completions_v1") e.request_shape = RequestShape::chat_completions_v1;
    else fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': unknown request_shape '" + shape + "'");
    e.base_url = doc.value("base_url", std::string(e.simulated() ? "sim://local" : ""));
    e.auth_env_var = doc.value("auth_env_var", std::string());
    if (doc.contains("max_output_tokens") && !doc["max_output_tokens"].is_null())
      e.max_output_tokens = doc["max_output_tokens"].get<std::int64_t>();
    e.max_concurrency = doc.value("max_concurrency", 4);
    e.timeout_seconds = doc.value("timeout_seconds", 120.0);
    if (e.simulated()) {
      if (!doc.contains("profile")) fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': simulated endpoint needs 'profile'");
      SimulationSpec spec;
      spec.default_profile = profile_from(doc["profile"]);
      if (doc.contains("task_profiles")) {
        for (const auto& [name, v] : doc["task_profiles"].items()) {
          auto task = tasks::parse_task(name);
          if (!task) fail(ErrorCode::invalid_argument, "endpoint '" + e.model_id + "': unknown task '" + name + "'");
          spec.per_task[*task] = profile_from(v);
        }
      }
      e.simulation = std::move(spec);
    } else if (doc.contains("profile") || doc.contains("task_profiles")) {
      fail(ErrorCode::invalid_argument,
           "endpoint '" + e.model_id + "': profiles need \"request_shape\": \"simulated\"");
    }
    validate(e);
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::invalid_argument, std::string("endpoint: ") + ex.what());
  }
}

std::vector<ModelEndpoint> parse_endpoint_config(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::parse, "endpoint config: not valid JSON");
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("endpoints")) fail(ErrorCode::invalid_argument, "endpoint config: missing 'endpoints'");
    list = &doc["endpoints"];
  }
  if (!list->is_array() || list->empty()) fail(ErrorCode::invalid_argument, "endpoint config: 'endpoints' must be a nonempty array");
  std::vector<ModelEndpoint> out;
  std::set<std::string> ids;
  for (const auto& entry : *list) {
    out.push_back(endpoint_from_json(entry));
    if (!ids.insert(out.back().model_id).second)
      fail(ErrorCode::invalid_argument, "endpoint config: duplicate model_id '" + out.back().model_id + "'");
  }
  return out;
}

std::vector<ModelEndpoint> load_endpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "endpoint config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_endpoint_config(buf.str());
}

std::vector<std::string> missing_credentials(const std::vector<ModelEndpoint>& endpoints) {
  std::vector<std::string> missing;
  for (const auto& e : endpoints) {
    if (e.simulated()) continue;
    const char* v = std::getenv(e.auth_env_var.c_str());
    if (v == nullptr || *v == '\0') missing.push_back(e.auth_env_var);
  }
  return missing;
}

}  // namespace mecw::model
