#include <charconv>
#include <cmath>

#include "radgame/core/error.hpp"
#include "radgame/report/assessment.hpp"

namespace radgame {

namespace {

constexpr const char* kSystematic = "systematic_evaluation_score";
constexpr const char* kOrganization = "organization_language_score";
constexpr const char* kSystematicRec = "systematic_evaluation_recommendation";
constexpr const char* kOrganizationRec = "organization_language_recommendation";

double scale_value(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::schema_violation, std::string("missing key ") + key, key);
    const auto& v = j[key];
    double value = 0.0;
    if (v.is_number()) {
        value = v.get<double>();
    } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error(ErrorCode::out_of_scale, std::string(key) + " is not a number: " + s, key);
        }
    } else {
        throw Error(ErrorCode::schema_violation, std::string(key) + " must be a number", key);
    }
    for (double level : {0.0, 0.5, 1.0}) {
        if (std::fabs(value - level) < 1e-9) return level;
    }
    throw Error(ErrorCode::out_of_scale, std::string(key) + " must be 0, 0.5 or 1", key);
}

std::string recommendation(const json& j, const char* key, double score) {
    std::string text;
    if (j.contains(key) && !j[key].is_null()) {
        if (!j[key].is_string()) throw Error(ErrorCode::schema_violation, std::string(key) + " must be a string", key);
        text = j[key].get<std::string>();
    }
    if (score == 1.0) return {};
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::schema_violation, std::string("missing ") + key + " for a score below 1", key);
    }
    return text;
}

}  // namespace

void to_json(json& j, const StyleAssessment& s) {
    j = json{{kSystematic, s.systematic_evaluation_score},
             {kOrganization, s.organization_language_score},
             {kSystematicRec, s.systematic_evaluation_recommendation},
             {kOrganizationRec, s.organization_language_recommendation}};
}

void from_json(const json& j, StyleAssessment& s) {
    if (!j.is_object()) throw Error(ErrorCode::schema_violation, "style assessment must be a JSON object");
    StyleAssessment out;
    out.systematic_evaluation_score = scale_value(j, kSystematic);
    out.organization_language_score = scale_value(j, kOrganization);
    out.systematic_evaluation_recommendation = recommendation(j, kSystematicRec, out.systematic_evaluation_score);
    out.organization_language_recommendation = recommendation(j, kOrganizationRec, out.organization_language_score);
    s = std::move(out);
}

StyleAssessment parse_style_response(std::string_view text) {
    return extract_first_json_object(text).get<StyleAssessment>();
}

double style_score(const StyleAssessment& s) {
    return 100.0 * (s.systematic_evaluation_score + s.organization_language_score) / 2.0;
}

}  // namespace radgame
