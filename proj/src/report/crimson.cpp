#include <numeric>

#include "radgame/core/error.hpp"
#include "radgame/report/assessment.hpp"

namespace radgame {

std::string_view to_string(ErrorCategory category) {
    static constexpr std::string_view names[] = {"a", "b", "c", "d"};
    return names[static_cast<std::size_t>(category)];
}

ErrorCategory parse_error_category(std::string_view text) {
    for (auto c : kErrorCategories) {
        if (to_string(c) == text) return c;
    }
    throw Error(ErrorCode::invalid_argument, "error category must be a, b, c or d; got '" + std::string(text) + "'");
}

std::size_t CrimsonAssessment::error_count() const {
    return std::accumulate(errors.begin(), errors.end(), std::size_t{0},
                           [](std::size_t n, const auto& list) { return n + list.size(); });
}

namespace {

// End index (inclusive) of the object opened at `open`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_string) {
            if (ch == '\\') {
                ++i;
            } else if (ch == '"') {
                in_string = false;
            }
            continue;
        }
        if (ch == '"') {
            in_string = true;
        } else if (ch == '{') {
            ++depth;
        } else if (ch == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

// Inserts a comma wherever a closing bracket or string is followed, across
// whitespace, by the opening quote of the next key.
std::string repair_missing_commas(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 8);
    bool in_string = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        out.push_back(ch);
        if (in_string) {
            if (ch == '\\' && i + 1 < text.size()) {
                out.push_back(text[++i]);
            } else if (ch == '"') {
                in_string = false;
            }
            continue;
        }
        if (ch == '"') {
            in_string = true;
            continue;
        }
        if (ch == '}' || ch == ']') {
            std::size_t k = i + 1;
            while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r' || text[k] == '\n')) ++k;
            if (k < text.size() && text[k] == '"') out.push_back(',');
        }
    }
    return out;
}

}  // namespace

json extract_first_json_object(std::string_view text) {
    for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        const auto close = balanced_end(text, open);
        if (close == std::string_view::npos) continue;
        const auto candidate = text.substr(open, close - open + 1);
        auto parsed = json::parse(candidate, nullptr, false);
        if (parsed.is_discarded()) parsed = json::parse(repair_missing_commas(candidate), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    }
    throw Error(ErrorCode::no_json_found, "no JSON object found in model response");
}

namespace {

std::vector<std::string> string_list(const json& v, const std::string& where, ErrorCode code) {
    if (!v.is_array()) throw Error(code, where + " must be a list", where);
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw Error(code, where + " must contain only strings", where);
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

void to_json(json& j, const CrimsonAssessment& a) {
    json errors = json::object();
    for (auto c : kErrorCategories) errors[std::string(to_string(c))] = a.errors_in(c);
    j = json{{"Explanation", a.explanation}, {"ClinicallySignificantErrors", errors}, {"MatchedFindings", a.matched_findings}};
}

void from_json(const json& j, CrimsonAssessment& a) {
    if (!j.is_object()) throw Error(ErrorCode::schema_violation, "assessment must be a JSON object");
    if (!j.contains("Explanation")) throw Error(ErrorCode::schema_violation, "missing key Explanation", "Explanation");
    if (!j["Explanation"].is_string()) {
        throw Error(ErrorCode::schema_violation, "Explanation must be a string", "Explanation");
    }
    if (!j.contains("ClinicallySignificantErrors") || !j["ClinicallySignificantErrors"].is_object()) {
        throw Error(ErrorCode::schema_violation, "missing object ClinicallySignificantErrors",
                    "ClinicallySignificantErrors");
    }
    if (!j.contains("MatchedFindings")) {
        throw Error(ErrorCode::schema_violation, "missing key MatchedFindings", "MatchedFindings");
    }
    CrimsonAssessment out;
    out.explanation = j["Explanation"].get<std::string>();
    const auto& errs = j["ClinicallySignificantErrors"];
    for (auto c : kErrorCategories) {
        const std::string key(to_string(c));
        if (!errs.contains(key)) {
            throw Error(ErrorCode::schema_violation, "ClinicallySignificantErrors lacks category " + key,
                        "ClinicallySignificantErrors." + key);
        }
        out.errors_in(c) = string_list(errs[key], "ClinicallySignificantErrors." + key, ErrorCode::non_list_errors);
    }
    out.matched_findings = string_list(j["MatchedFindings"], "MatchedFindings", ErrorCode::schema_violation);
    a = std::move(out);
}

CrimsonAssessment parse_crimson_response(std::string_view text) {
    return extract_first_json_object(text).get<CrimsonAssessment>();
}

double crimson_score(const CrimsonAssessment& a) {
    const auto m = static_cast<double>(a.matched_count());
    const auto e = static_cast<double>(a.error_count());
    if (m + e == 0.0) return 100.0;
    return 100.0 * m / (m + e);
}

}  // namespace radgame
