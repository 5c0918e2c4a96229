#include "radgame/report/prompts.hpp"

#include <cctype>
#include <set>

#include "radgame/core/assets.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

namespace {

bool blank(std::string_view s) {
    for (unsigned char ch : s) {
        if (!std::isspace(ch)) return false;
    }
    return true;
}

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::set<std::string> used;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string name(tmpl.substr(i + 1, close - i - 1));
                auto it = values.find(name);
                if (it != values.end()) {
                    out += it->second;
                    used.insert(name);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    for (const auto& [name, value] : values) {
        if (!used.count(name)) throw Error(ErrorCode::config_error, "template has no {" + name + "} slot");
    }
    return out;
}

std::string build_crimson_prompt(int age_years, std::string_view indication, std::string_view reference,
                                 std::string_view candidate) {
    if (blank(reference)) throw Error(ErrorCode::invalid_argument, "reference report is empty");
    if (blank(candidate)) throw Error(ErrorCode::invalid_argument, "candidate report is empty");
    return render_template(assets::crimson_prompt_template(), {{"age", std::to_string(age_years)},
                                                               {"indication", std::string(indication)},
                                                               {"reference", std::string(reference)},
                                                               {"candidate", std::string(candidate)}});
}

std::string build_style_prompt(std::string_view candidate) {
    if (blank(candidate)) throw Error(ErrorCode::invalid_argument, "candidate report is empty");
    return render_template(assets::style_prompt_template(), {{"candidate", std::string(candidate)}});
}

}  // namespace radgame
