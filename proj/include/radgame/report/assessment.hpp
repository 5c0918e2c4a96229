#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radgame/core/serialization.hpp"

namespace radgame {

// a) false positive, b) missing finding, c) wrong location/position,
// d) wrong severity.
enum class ErrorCategory { a = 0, b = 1, c = 2, d = 3 };

inline constexpr std::array<ErrorCategory, 4> kErrorCategories{ErrorCategory::a, ErrorCategory::b,
                                                               ErrorCategory::c, ErrorCategory::d};

std::string_view to_string(ErrorCategory category);
ErrorCategory parse_error_category(std::string_view text);

struct CrimsonAssessment {
    std::string explanation;
    std::array<std::vector<std::string>, 4> errors;
    std::vector<std::string> matched_findings;

    std::vector<std::string>& errors_in(ErrorCategory c) { return errors[static_cast<std::size_t>(c)]; }
    const std::vector<std::string>& errors_in(ErrorCategory c) const { return errors[static_cast<std::size_t>(c)]; }
    std::size_t error_count() const;
    std::size_t matched_count() const { return matched_findings.size(); }

    friend bool operator==(const CrimsonAssessment&, const CrimsonAssessment&) = default;
};

// Serializes with the judge's own key names, so parse(serialize(x)) == x.
void to_json(json& j, const CrimsonAssessment& a);
void from_json(const json& j, CrimsonAssessment& a);

/// Pulls the first JSON object out of free text (surrounding prose and code
/// fences are ignored) and validates it against the CRIMSON output schema.
///
/// Errors are distinct so callers can decide to re-ask:
/// no_json_found, schema_violation (missing key, wrong type), non_list_errors
/// (an a-d value that is not a list of strings).
CrimsonAssessment parse_crimson_response(std::string_view text);

// 100 * M / (M + E); an assessment with nothing matched and no errors is 100.
double crimson_score(const CrimsonAssessment& a);

struct StyleAssessment {
    double systematic_evaluation_score = 0.0;   // 0, 0.5 or 1
    double organization_language_score = 0.0;
    std::string systematic_evaluation_recommendation;   // empty iff score is 1
    std::string organization_language_recommendation;

    friend bool operator==(const StyleAssessment&, const StyleAssessment&) = default;
};

void to_json(json& j, const StyleAssessment& s);
void from_json(const json& j, StyleAssessment& s);

// Scores must be 0, 0.5 or 1 (numbers or numeric strings), else out_of_scale.
// Missing score keys are schema_violation. A recommendation attached to a
// perfect score is dropped; a missing one on an imperfect score is a
// schema_violation.
StyleAssessment parse_style_response(std::string_view text);

// Mean of the two pillars scaled to 0-100.
double style_score(const StyleAssessment& s);

// First balanced {...} in `text` that parses as JSON. Tolerates a missing
// comma between a closing bracket and the next key, which judges copy from
// the CRIMSON format example. Throws Error(no_json_found).
json extract_first_json_object(std::string_view text);

struct ErrorRef {
    ErrorCategory category = ErrorCategory::a;
    std::size_t index = 0;
    std::string text;  // snapshot; when set it must match, or locate, the error

    friend bool operator==(const ErrorRef&, const ErrorRef&) = default;
};

enum class OverrideAction { remove, reclassify };

struct Override {
    ErrorRef error_ref;
    OverrideAction action = OverrideAction::remove;
    std::optional<ErrorCategory> target;  // for reclassify
    std::string reviewer;
    std::string reason;

    friend bool operator==(const Override&, const Override&) = default;
};

void to_json(json& j, const Override& o);
void from_json(const json& j, Override& o);

struct OverrideLogEntry {
    Override request;
    ErrorRef resolved;  // position in the original assessment
    double score_before = 0.0;
    double score_after = 0.0;

    friend bool operator==(const OverrideLogEntry&, const OverrideLogEntry&) = default;
};

void to_json(json& j, const OverrideLogEntry& e);
void from_json(const json& j, OverrideLogEntry& e);

struct ReportGrade {
    double crimson_percent = 100.0;
    std::optional<double> style_percent;
    CrimsonAssessment assessment;           // after overrides
    CrimsonAssessment original_assessment;  // as judged
    std::optional<StyleAssessment> style_assessment;
    std::vector<OverrideLogEntry> override_log;

    friend bool operator==(const ReportGrade&, const ReportGrade&) = default;
};

void to_json(json& j, const ReportGrade& g);
void from_json(const json& j, ReportGrade& g);

ReportGrade make_grade(const CrimsonAssessment& assessment, std::optional<StyleAssessment> style = std::nullopt);

/// Applies radiologist overrides to the judged assessment. References always
/// resolve against the original assessment (category + index, with the text
/// snapshot used to confirm or relocate the entry), so overrides can be
/// appended over time: passing an existing grade re-applies its log followed
/// by `overrides`. Throws Error(dangling_reference) for refs that resolve to
/// nothing and Error(invalid_argument) when two overrides hit the same error.
ReportGrade apply_overrides(const CrimsonAssessment& original, const std::vector<Override>& overrides,
                            std::optional<StyleAssessment> style = std::nullopt);
ReportGrade apply_overrides(const ReportGrade& grade, const std::vector<Override>& overrides);

}  // namespace radgame
