#include "store/store.hpp"
#include "util/error.hpp"

namespace mecw::store {

using nlohmann::json;

namespace {

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> optional_string(const json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<std::string>();
}

json question_to_json(const tasks::QuestionInstance& q) {
  json out = {{"task", tasks::to_string(q.task)}, {"text", q.text}};
  out["person"] = optional_json(q.person);
  if (q.filter)
    out["filter"] = {{"dimension", q.filter->dimension == tasks::FilterDimension::color ? "color" : "item"},
                     {"value", q.filter->value}};
  else
    out["filter"] = nullptr;
  if (q.expected.kind == tasks::ExpectedAnswer::Kind::numeric)
    out["expected"] = {{"kind", "numeric"}, {"value", q.expected.numeric_value}};
  else
    out["expected"] = {{"kind", "string"}, {"value", q.expected.string_value}};
  return out;
}

tasks::QuestionInstance question_from_json(const json& doc) {
  tasks::QuestionInstance q;
  auto task = tasks::parse_task(doc.at("task").get<std::string>());
  if (!task) fail(ErrorCode::corrupt, "unknown task in question");
  q.task = *task;
  q.text = doc.at("text").get<std::string>();
  q.person = optional_string(doc, "person");
  if (doc.contains("filter") && !doc["filter"].is_null()) {
    const auto& f = doc["filter"];
    std::string dim = f.at("dimension").get<std::string>();
    if (dim != "color" && dim != "item") fail(ErrorCode::corrupt, "unknown filter dimension '" + dim + "'");
    q.filter = tasks::Filter{dim == "color" ? tasks::FilterDimension::color : tasks::FilterDimension::item,
                             f.at("value").get<std::string>()};
  }
  const auto& e = doc.at("expected");
  std::string kind = e.at("kind").get<std::string>();
  if (kind == "numeric") q.expected = tasks::ExpectedAnswer::numeric(e.at("value").get<std::int64_t>());
  else if (kind == "string") q.expected = tasks::ExpectedAnswer::text(e.at("value").get<std::string>());
  else fail(ErrorCode::corrupt, "unknown expected kind '" + kind + "'");
  return q;
}

}  // namespace

json trial_to_json(const sweep::Trial& t) {
  json out = t.extra.is_object() ? t.extra : json::object();
  out["schema"] = kSchemaVersion;
  out["run_id"] = t.run_id;
  out["model_id"] = t.cell.model_id;
  out["task"] = tasks::to_string(t.cell.task);
  out["row_count"] = t.cell.row_count;
  out["trial_index"] = t.cell.trial_index;
  out["trial_seed"] = t.trial_seed;
  out["prompt_text"] = t.prompt_text;
  out["prompt_hash"] = t.prompt_hash;
  out["input_tokens"] = t.input_tokens.value;
  out["input_tokens_source"] = model::to_string(t.input_tokens.source);
  out["output_tokens"] = optional_json(t.output_tokens);
  out["question"] = question_to_json(t.question);
  out["raw_response"] = t.raw_response;
  out["response_truncated"] = t.response_truncated;
  json grade = {{"correct", t.grade.correct}};
  grade["parsed_answer"] = optional_json(t.grade.parsed_answer);
  grade["failure_reason"] =
      t.grade.failure_reason ? json(tasks::to_string(*t.grade.failure_reason)) : json(nullptr);
  out["grade"] = grade;
  out["correct"] = t.correct_bit();
  out["latency_ms"] = t.latency_ms;
  out["attempts"] = t.attempts;
  out["started_at"] = optional_json(t.started_at);
  out["finished_at"] = optional_json(t.finished_at);
  return out;
}

sweep::Trial trial_from_json(const json& doc) {
  static const char* const known[] = {"schema",      "run_id",        "model_id",           "task",
                                      "row_count",   "trial_index",   "trial_seed",         "prompt_text",
                                      "prompt_hash", "input_tokens",  "input_tokens_source", "output_tokens",
                                      "question",    "raw_response",  "response_truncated", "grade",
                                      "correct",     "latency_ms",    "attempts",           "started_at",
                                      "finished_at"};
  if (!doc.is_object()) fail(ErrorCode::corrupt, "trial record is not an object");
  try {
    int schema = doc.at("schema").get<int>();
    if (schema > kSchemaVersion) fail(ErrorCode::corrupt, "trial schema " + std::to_string(schema) + " is newer than supported");
    sweep::Trial t;
    t.run_id = doc.at("run_id").get<std::string>();
    t.cell.model_id = doc.at("model_id").get<std::string>();
    auto task = tasks::parse_task(doc.at("task").get<std::string>());
    if (!task) fail(ErrorCode::corrupt, "unknown task");
    t.cell.task = *task;
    t.cell.row_count = doc.at("row_count").get<std::int64_t>();
    t.cell.trial_index = doc.at("trial_index").get<std::int64_t>();
    t.trial_seed = doc.at("trial_seed").get<std::uint64_t>();
    t.prompt_text = doc.at("prompt_text").get<std::string>();
    t.prompt_hash = doc.at("prompt_hash").get<std::string>();
    t.input_tokens.value = doc.at("input_tokens").get<std::int64_t>();
    std::string source = doc.at("input_tokens_source").get<std::string>();
    if (source != "reported" && source != "estimated") fail(ErrorCode::corrupt, "unknown token source '" + source + "'");
    t.input_tokens.source = source == "reported" ? model::TokenSource::reported : model::TokenSource::estimated;
    if (!doc.at("output_tokens").is_null()) t.output_tokens = doc["output_tokens"].get<std::int64_t>();
    t.question = question_from_json(doc.at("question"));
    t.raw_response = doc.at("raw_response").get<std::string>();
    t.response_truncated = doc.at("response_truncated").get<bool>();
    const auto& g = doc.at("grade");
    t.grade.correct = g.at("correct").get<bool>();
    t.grade.parsed_answer = optional_string(g, "parsed_answer");
    if (auto reason = optional_string(g, "failure_reason")) {
      auto r = tasks::parse_failure_reason(*reason);
      if (!r) fail(ErrorCode::corrupt, "unknown failure reason '" + *reason + "'");
      t.grade.failure_reason = *r;
    }
    if (doc.at("correct").get<int>() != t.correct_bit()) fail(ErrorCode::corrupt, "correct bit disagrees with grade");
    t.latency_ms = doc.at("latency_ms").get<std::int64_t>();
    t.attempts = doc.at("attempts").get<int>();
    t.started_at = optional_string(doc, "started_at");
    t.finished_at = optional_string(doc, "finished_at");
    for (const auto& [key, value] : doc.items()) {
      bool is_known = false;
      for (const char* k : known) is_known = is_known || key == k;
      if (!is_known) t.extra[key] = value;
    }
    return t;
  } catch (const json::exception& ex) {
    fail(ErrorCode::corrupt, std::string("malformed trial record: ") + ex.what());
  }
}

std::string trial_to_line(const sweep::Trial& t) {
  std::string line = trial_to_json(t).dump(-1, ' ', false, json::error_handler_t::replace);
  line.push_back('\n');
  return line;
}

json to_json(const RunManifest& m) {
  return {{"format", "mecw-run-manifest"},
          {"schema_version", m.schema_version},
          {"run_id", m.run_id},
          {"harness_version", m.harness_version},
          {"plan", sweep::to_json(m.plan)},
          {"lexicon", {{"id", m.lexicon_id}, {"content", json::parse(m.lexicon_json)}}},
          {"prompt_template",
           {{"id", m.prompt_template_id}, {"hash", m.prompt_template_hash}, {"content", m.prompt_template_json}}},
          {"simulation_only", m.simulation_only},
          {"started_at", optional_json(m.started_at)},
          {"defaults", m.defaults}};
}

RunManifest manifest_from_json(const json& doc) {
  try {
    RunManifest m;
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version > kSchemaVersion) fail(ErrorCode::corrupt, "manifest schema is newer than supported");
    m.run_id = doc.at("run_id").get<std::string>();
    m.harness_version = doc.at("harness_version").get<std::string>();
    m.plan = sweep::plan_from_json(doc.at("plan"));
    m.lexicon_id = doc.at("lexicon").at("id").get<std::string>();
    m.lexicon_json = doc.at("lexicon").at("content").dump();
    m.prompt_template_id = doc.at("prompt_template").at("id").get<std::string>();
    m.prompt_template_hash = doc.at("prompt_template").at("hash").get<std::string>();
    m.prompt_template_json = doc.at("prompt_template").at("content").get<std::string>();
    m.simulation_only = doc.at("simulation_only").get<bool>();
    m.started_at = optional_string(doc, "started_at");
    m.defaults = doc.value("defaults", json::object());
    return m;
  } catch (const json::exception& ex) {
    fail(ErrorCode::corrupt, std::string("malformed manifest: ") + ex.what());
  }
}

bool TrialFilter::matches(const sweep::Trial& t) const {
  if (model_id && t.cell.model_id != *model_id) return false;
  if (task && t.cell.task != *task) return false;
  if (min_tokens && t.input_tokens.value < *min_tokens) return false;
  if (max_tokens && t.input_tokens.value >= *max_tokens) return false;
  return true;
}

}  // namespace mecw::store
