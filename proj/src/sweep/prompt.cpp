#include "sweep/prompt.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "util/digest.hpp"
#include "util/error.hpp"
#include "util/resources.hpp"

namespace mecw::sweep {

PromptTemplate parse_prompt_template(std::string_view json_text) {
  auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) fail(ErrorCode::parse, "prompt template: not a JSON object");
  PromptTemplate t;
  try {
    t.id = doc.at("id").get<std::string>();
    t.version = doc.at("version").get<int>();
    t.system_instruction = doc.at("system_instruction").get<std::string>();
    t.instruction_header = doc.at("instruction_header").get<std::string>();
    t.data_preamble = doc.at("data_preamble").get<std::string>();
    t.question_preamble = doc.at("question_preamble").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::invalid_argument, std::string("prompt template: ") + ex.what());
  }
  if (t.instruction_header.find("{\"answer\": <value>}") == std::string::npos)
    fail(ErrorCode::invalid_argument, "prompt template: header must state the {\"answer\": <value>} response format");
  t.source_text = std::string(json_text);
  t.hash = "sha256:" + sha256_hex(json_text);
  return t;
}

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate t = parse_prompt_template(resources::default_prompt_template_json());
  return t;
}

PromptTemplate load_prompt_template(const std::string& id_or_path) {
  if (id_or_path == default_prompt_template().id) return default_prompt_template();
  std::ifstream in(id_or_path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "prompt template: unknown id or unreadable file '" + id_or_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prompt_template(buf.str());
}

std::string build_prompt(tasks::Rows rows, const tasks::QuestionInstance& question, const PromptTemplate& tmpl,
                         rng::Stream& stream) {
  if (rows.empty()) fail(ErrorCode::invalid_argument, "build_prompt: no rows");
  std::vector<const std::string*> lines;
  lines.reserve(rows.size());
  std::size_t size = tmpl.instruction_header.size() + question.text.size() + 64;
  for (const auto& row : rows) {
    lines.push_back(&row.sentence);
    size += row.sentence.size() + 1;
  }
  stream.shuffle(lines);

  std::string out;
  out.reserve(size);
  out.append(tmpl.instruction_header).append("\n\n").append(tmpl.data_preamble).append("\n");
  for (const auto* line : lines) out.append(*line).append("\n");
  out.append("\n").append(tmpl.question_preamble).append(" ").append(question.text).append("\n");
  return out;
}

}  // namespace mecw::sweep
