#pragma once

#include <map>
#include <string>
#include <string_view>

namespace radgame {

// Single-pass substitution of {name} slots. Text outside the slots is copied
// byte for byte, and substituted values are never rescanned, so a candidate
// report containing "{reference}" stays literal. Every key in `values` must
// occur in the template (Error(config_error) otherwise).
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// Throws Error(invalid_argument) for an empty (or whitespace-only) reference
// or candidate.
std::string build_crimson_prompt(int age_years, std::string_view indication, std::string_view reference,
                                 std::string_view candidate);

std::string build_style_prompt(std::string_view candidate);

// Appended to a prompt when the judge's first answer could not be parsed.
inline constexpr std::string_view kJsonOnlyReminder =
    "\n\nReturn only the JSON object described above, with no other text.";

}  // namespace radgame
