#pragma once

#include <string_view>

namespace mecw::resources {

// Contents of data/default_lexicon.json and data/prompt_template_v1.json,
// embedded at build time.
std::string_view default_lexicon_json();
std::string_view default_prompt_template_json();

}  // namespace mecw::resources
