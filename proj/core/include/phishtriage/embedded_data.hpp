#pragma once

#include <string_view>

// Configuration data shipped under core/data, compiled into the library.
namespace phishtriage::embedded {

std::string_view emoji_ranges();
std::string_view label_synonyms();
std::string_view brands();
std::string_view shorteners();
std::string_view persona_prompt();
std::string_view public_suffix_list();

}  // namespace phishtriage::embedded
