#pragma once

#include <string_view>

#include "radgame/core/domain.hpp"
#include "radgame/gateway/gateway.hpp"
#include "radgame/report/assessment.hpp"

namespace radgame {

// True for the parse failures that justify asking the judge again.
bool is_malformed_output(ErrorCode code);

// Scores candidate reports through the judge endpoint. A response that fails
// to parse is re-asked once with kJsonOnlyReminder appended; a second failure
// is surfaced. Gateway errors propagate unchanged.
class ReportJudge {
public:
    explicit ReportJudge(Gateway& gateway) : gateway_(gateway) {}

    CrimsonAssessment judge_crimson(const ReportCase& c, std::string_view candidate);
    StyleAssessment judge_style(const ReportCase& c, std::string_view candidate);
    ReportGrade grade(const ReportCase& c, std::string_view candidate);

    // Gateway calls made by the most recent judge_* call (1, or 2 after a re-ask).
    int last_call_count() const { return last_calls_; }

private:
    template <typename Parse>
    auto ask(GatewayRequest req, Parse parse) -> decltype(parse(std::string_view{}));

    Gateway& gateway_;
    int last_calls_ = 0;
};

}  // namespace radgame
