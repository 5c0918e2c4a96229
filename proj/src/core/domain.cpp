#include "radgame/core/domain.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "radgame/core/error.hpp"

namespace radgame {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

[[noreturn]] void bad_token(std::string_view kind, std::string_view text) {
    throw Error(ErrorCode::invalid_argument,
                "unknown " + std::string(kind) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(FindingMode mode) { return mode == FindingMode::draw ? "draw" : "select"; }

std::string_view to_string(Module module) { return module == Module::localize ? "localize" : "report"; }

std::string_view to_string(Group group) { return group == Group::gamified ? "gamified" : "traditional"; }

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::pretest: return "pretest";
        case Phase::learning: return "learning";
        case Phase::posttest: return "posttest";
        case Phase::done: return "done";
    }
    return "done";
}

std::string_view to_string(Purpose purpose) {
    switch (purpose) {
        case Purpose::pretest: return "pretest";
        case Purpose::learning: return "learning";
        case Purpose::posttest: return "posttest";
    }
    return "pretest";
}

FindingMode parse_finding_mode(std::string_view text) {
    const auto t = lower(text);
    if (t == "draw") return FindingMode::draw;
    if (t == "select") return FindingMode::select;
    bad_token("finding mode", text);
}

Module parse_module(std::string_view text) {
    const auto t = lower(text);
    if (t == "localize") return Module::localize;
    if (t == "report") return Module::report;
    bad_token("module", text);
}

Group parse_group(std::string_view text) {
    const auto t = lower(text);
    if (t == "gamified") return Group::gamified;
    if (t == "traditional") return Group::traditional;
    bad_token("group", text);
}

Phase parse_phase(std::string_view text) {
    const auto t = lower(text);
    if (t == "pretest") return Phase::pretest;
    if (t == "learning") return Phase::learning;
    if (t == "posttest") return Phase::posttest;
    if (t == "done") return Phase::done;
    bad_token("phase", text);
}

Purpose parse_purpose(std::string_view text) {
    const auto t = lower(text);
    if (t == "pretest") return Purpose::pretest;
    if (t == "learning") return Purpose::learning;
    if (t == "posttest") return Purpose::posttest;
    bad_token("purpose", text);
}

Group opposite(Group group) { return group == Group::gamified ? Group::traditional : Group::gamified; }

const FindingAnnotation* LocalizeCase::find(std::string_view class_id) const {
    auto it = std::find_if(annotations.begin(), annotations.end(),
                           [&](const FindingAnnotation& a) { return a.class_id == class_id; });
    return it == annotations.end() ? nullptr : &*it;
}

std::optional<std::string> validate_case(const LocalizeCase& c) {
    if (c.case_id.empty()) return "case_id non-empty";
    if (c.image_width_px <= 0 || c.image_height_px <= 0) return "image dimensions positive";
    std::set<std::string> seen;
    for (const auto& a : c.annotations) {
        if (!seen.insert(a.class_id).second) return "annotation class_ids distinct (" + a.class_id + ")";
        if (!a.present) return "ground-truth annotations present";
        for (const auto& b : a.boxes) {
            if (auto v = validate_box(b)) return "box of " + a.class_id + ": " + *v;
        }
    }
    return std::nullopt;
}

std::optional<std::string> validate_case(const ReportCase& c) {
    if (c.case_id.empty()) return "case_id non-empty";
    if (c.image_refs.empty()) return "image_refs non-empty";
    if (c.reference_findings.empty()) return "reference_findings non-empty";
    if (c.age_years < 0) return "age_years >= 0";
    return std::nullopt;
}

}  // namespace radgame
