#include <map>
#include <set>

#include "radgame/core/error.hpp"
#include "radgame/report/assessment.hpp"

namespace radgame {

void to_json(json& j, const Override& o) {
    j = json{{"error_ref",
              {{"category", to_string(o.error_ref.category)}, {"index", o.error_ref.index}, {"text", o.error_ref.text}}},
             {"action", o.action == OverrideAction::remove ? "remove" : "reclassify"},
             {"reviewer", o.reviewer},
             {"reason", o.reason}};
    if (o.target) j["target"] = to_string(*o.target);
}

void from_json(const json& j, Override& o) {
    const auto& ref = j.at("error_ref");
    o.error_ref.category = parse_error_category(require_field<std::string>(ref, "category"));
    o.error_ref.index = require_field<std::size_t>(ref, "index");
    o.error_ref.text = ref.value("text", std::string{});
    const auto action = require_field<std::string>(j, "action");
    if (action == "remove") {
        o.action = OverrideAction::remove;
    } else if (action == "reclassify") {
        o.action = OverrideAction::reclassify;
    } else {
        throw Error(ErrorCode::schema_violation, "override action must be remove or reclassify", "action");
    }
    o.target.reset();
    if (j.contains("target") && !j["target"].is_null()) {
        o.target = parse_error_category(j["target"].get<std::string>());
    }
    o.reviewer = j.value("reviewer", std::string{});
    o.reason = j.value("reason", std::string{});
}

void to_json(json& j, const OverrideLogEntry& e) {
    j = json{{"request", e.request},
             {"resolved",
              {{"category", to_string(e.resolved.category)}, {"index", e.resolved.index}, {"text", e.resolved.text}}},
             {"score_before", e.score_before},
             {"score_after", e.score_after}};
}

void from_json(const json& j, OverrideLogEntry& e) {
    e.request = j.at("request").get<Override>();
    const auto& r = j.at("resolved");
    e.resolved.category = parse_error_category(require_field<std::string>(r, "category"));
    e.resolved.index = require_field<std::size_t>(r, "index");
    e.resolved.text = r.value("text", std::string{});
    e.score_before = require_field<double>(j, "score_before");
    e.score_after = require_field<double>(j, "score_after");
}

void to_json(json& j, const ReportGrade& g) {
    j = json{{"crimson_percent", g.crimson_percent},
             {"assessment", g.assessment},
             {"original_assessment", g.original_assessment},
             {"override_log", g.override_log}};
    j["style_percent"] = g.style_percent ? json(*g.style_percent) : json(nullptr);
    j["style_assessment"] = g.style_assessment ? json(*g.style_assessment) : json(nullptr);
}

void from_json(const json& j, ReportGrade& g) {
    g.crimson_percent = require_field<double>(j, "crimson_percent");
    g.assessment = j.at("assessment").get<CrimsonAssessment>();
    g.original_assessment = j.at("original_assessment").get<CrimsonAssessment>();
    g.override_log = j.value("override_log", std::vector<OverrideLogEntry>{});
    g.style_percent.reset();
    g.style_assessment.reset();
    if (j.contains("style_percent") && !j["style_percent"].is_null()) g.style_percent = j["style_percent"].get<double>();
    if (j.contains("style_assessment") && !j["style_assessment"].is_null()) {
        g.style_assessment = j["style_assessment"].get<StyleAssessment>();
    }
}

ReportGrade make_grade(const CrimsonAssessment& assessment, std::optional<StyleAssessment> style) {
    ReportGrade g;
    g.assessment = assessment;
    g.original_assessment = assessment;
    g.crimson_percent = crimson_score(assessment);
    g.style_assessment = std::move(style);
    if (g.style_assessment) g.style_percent = style_score(*g.style_assessment);
    return g;
}

namespace {

ErrorRef resolve(const CrimsonAssessment& original, const ErrorRef& ref, const std::set<std::pair<int, std::size_t>>& taken) {
    const auto& list = original.errors_in(ref.category);
    const int cat = static_cast<int>(ref.category);
    if (ref.index < list.size() && (ref.text.empty() || list[ref.index] == ref.text)) {
        return {ref.category, ref.index, list[ref.index]};
    }
    if (!ref.text.empty()) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i] == ref.text && !taken.count({cat, i})) return {ref.category, i, list[i]};
        }
    }
    throw Error(ErrorCode::dangling_reference,
                "override refers to error " + std::string(to_string(ref.category)) + "[" + std::to_string(ref.index) +
                    "] which does not exist",
                ref.text);
}

}  // namespace

ReportGrade apply_overrides(const CrimsonAssessment& original, const std::vector<Override>& overrides,
                            std::optional<StyleAssessment> style) {
    ReportGrade grade = make_grade(original, std::move(style));

    std::set<std::pair<int, std::size_t>> taken;
    // Per original error: removed, or the category it moved to.
    std::map<std::pair<int, std::size_t>, std::optional<ErrorCategory>> edits;
    std::vector<std::pair<std::pair<int, std::size_t>, ErrorCategory>> moved_in_order;

    for (const auto& o : overrides) {
        if (o.action == OverrideAction::reclassify && !o.target) {
            throw Error(ErrorCode::invalid_argument, "reclassify override needs a target category");
        }
        const ErrorRef resolved = resolve(original, o.error_ref, taken);
        const std::pair<int, std::size_t> key{static_cast<int>(resolved.category), resolved.index};
        if (!taken.insert(key).second) {
            throw Error(ErrorCode::invalid_argument, "two overrides target the same error", resolved.text);
        }
        const double before = grade.crimson_percent;
        if (o.action == OverrideAction::remove) {
            edits[key] = std::nullopt;
        } else {
            edits[key] = *o.target;
            moved_in_order.push_back({key, *o.target});
        }

        // Rebuild the edited assessment from the original after every step so
        // each log entry records the score it produced.
        CrimsonAssessment edited = original;
        for (auto c : kErrorCategories) edited.errors_in(c).clear();
        for (auto c : kErrorCategories) {
            const auto& list = original.errors_in(c);
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (!edits.count({static_cast<int>(c), i})) edited.errors_in(c).push_back(list[i]);
            }
        }
        for (const auto& [src, target] : moved_in_order) {
            edited.errors_in(target).push_back(original.errors_in(static_cast<ErrorCategory>(src.first))[src.second]);
        }
        grade.assessment = std::move(edited);
        grade.crimson_percent = crimson_score(grade.assessment);
        grade.override_log.push_back({o, resolved, before, grade.crimson_percent});
    }
    return grade;
}

ReportGrade apply_overrides(const ReportGrade& grade, const std::vector<Override>& overrides) {
    std::vector<Override> all;
    all.reserve(grade.override_log.size() + overrides.size());
    for (const auto& e : grade.override_log) all.push_back(e.request);
    all.insert(all.end(), overrides.begin(), overrides.end());
    return apply_overrides(grade.original_assessment, all, grade.style_assessment);
}

}  // namespace radgame
