#pragma once

#include <string>
#include <string_view>

#include "synthgen/dataset.hpp"
#include "tasks/tasks.hpp"
#include "util/rng.hpp"

namespace mecw::sweep {

struct PromptTemplate {
  std::string id;
  int version = 0;
  std::string system_instruction;
  std::string instruction_header;
  std::string data_preamble;
  std::string question_preamble;
  // "sha256:<hex>" of the template file bytes.
  std::string hash;
  std::string source_text;
};

PromptTemplate parse_prompt_template(std::string_view json_text);
const PromptTemplate& default_prompt_template();
// The built-in template id, or a path to a template file.
PromptTemplate load_prompt_template(const std::string& id_or_path);

// Header, the rows in a uniformly shuffled order (one sentence per line),
// then the question.
std::string build_prompt(tasks::Rows rows, const tasks::QuestionInstance& question, const PromptTemplate& tmpl,
                         rng::Stream& stream);

}  // namespace mecw::sweep
