#pragma once

#include <string_view>

// Text assets compiled into the library from assets/. The files stay the
// editable source of truth; the build embeds whatever they contain.
namespace radgame::assets {

std::string_view default_taxonomy_json();
std::string_view interstitial_taxonomy_json();
std::string_view crimson_prompt_template();
std::string_view style_prompt_template();
std::string_view explainer_draw_prompt_template();
std::string_view explainer_select_prompt_template();
std::string_view explainer_fallbacks_json();

}  // namespace radgame::assets
