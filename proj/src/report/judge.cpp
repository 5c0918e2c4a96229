#include "radgame/report/judge.hpp"

#include "radgame/core/error.hpp"
#include "radgame/report/prompts.hpp"

namespace radgame {

bool is_malformed_output(ErrorCode code) {
    switch (code) {
        case ErrorCode::no_json_found:
        case ErrorCode::schema_violation:
        case ErrorCode::non_list_errors:
        case ErrorCode::out_of_scale:
        case ErrorCode::parse_error: return true;
        default: return false;
    }
}

template <typename Parse>
auto ReportJudge::ask(GatewayRequest req, Parse parse) -> decltype(parse(std::string_view{})) {
    last_calls_ = 1;
    auto first = gateway_.complete(req);
    try {
        return parse(first.text);
    } catch (const Error& e) {
        if (!is_malformed_output(e.code())) throw;
    }
    req.prompt += kJsonOnlyReminder;
    last_calls_ = 2;
    auto second = gateway_.complete(req);
    return parse(second.text);
}

CrimsonAssessment ReportJudge::judge_crimson(const ReportCase& c, std::string_view candidate) {
    GatewayRequest req;
    req.role = ModelRole::judge;
    req.prompt = build_crimson_prompt(c.age_years, c.indication, c.reference_findings, candidate);
    req.purpose = "crimson";
    req.subject = c.case_id;
    return ask(std::move(req), [](std::string_view text) { return parse_crimson_response(text); });
}

StyleAssessment ReportJudge::judge_style(const ReportCase& c, std::string_view candidate) {
    GatewayRequest req;
    req.role = ModelRole::judge;
    req.prompt = build_style_prompt(candidate);
    req.purpose = "style";
    req.subject = c.case_id;
    return ask(std::move(req), [](std::string_view text) { return parse_style_response(text); });
}

ReportGrade ReportJudge::grade(const ReportCase& c, std::string_view candidate) {
    auto crimson = judge_crimson(c, candidate);
    auto style = judge_style(c, candidate);
    return make_grade(crimson, std::move(style));
}

}  // namespace radgame
