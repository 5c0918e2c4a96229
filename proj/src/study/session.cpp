#include "radgame/core/error.hpp"
#include "radgame/study/study.hpp"

namespace radgame {

std::string_view to_string(CaseStatus s) {
    switch (s) {
        case CaseStatus::graded: return "graded";
        case CaseStatus::pending: return "pending";
        case CaseStatus::recorded: return "recorded";
        case CaseStatus::unanswered: return "unanswered";
    }
    return "recorded";
}

CaseStatus parse_case_status(std::string_view text) {
    for (auto s : {CaseStatus::graded, CaseStatus::pending, CaseStatus::recorded, CaseStatus::unanswered}) {
        if (to_string(s) == text) return s;
    }
    throw Error(ErrorCode::invalid_argument, "unknown case status '" + std::string(text) + "'");
}

void to_json(json& j, const CaseRecord& r) {
    j = json{{"case_id", r.case_id},
             {"phase", to_string(r.phase)},
             {"index", r.index},
             {"started_at", r.started_at},
             {"submitted_at", r.submitted_at},
             {"elapsed_seconds", r.elapsed_seconds},
             {"submission", r.submission},
             {"grade", r.grade ? *r.grade : json(nullptr)},
             {"status", to_string(r.status)},
             {"feedback", r.feedback},
             {"idempotency_key", r.idempotency_key}};
}

void from_json(const json& j, CaseRecord& r) {
    r.case_id = require_field<std::string>(j, "case_id");
    r.phase = parse_phase(require_field<std::string>(j, "phase"));
    r.index = require_field<std::size_t>(j, "index");
    r.started_at = require_field<double>(j, "started_at");
    r.submitted_at = require_field<double>(j, "submitted_at");
    r.elapsed_seconds = require_field<double>(j, "elapsed_seconds");
    r.submission = j.value("submission", json(nullptr));
    r.grade.reset();
    if (j.contains("grade") && !j["grade"].is_null()) r.grade = j["grade"];
    r.status = parse_case_status(require_field<std::string>(j, "status"));
    r.feedback = j.value("feedback", std::vector<FeedbackItem>{});
    r.idempotency_key = j.value("idempotency_key", std::string());
}

const std::string* StudySession::current_case() const {
    if (!phase_started || cursor >= case_ids.size()) return nullptr;
    return &case_ids[cursor];
}

std::vector<const CaseRecord*> StudySession::records_in(Phase p) const {
    std::vector<const CaseRecord*> out;
    for (const auto& r : records) {
        if (r.phase == p) out.push_back(&r);
    }
    return out;
}

CaseRecord* StudySession::find_record(Phase p, const std::string& case_id) {
    for (auto& r : records) {
        if (r.phase == p && r.case_id == case_id) return &r;
    }
    return nullptr;
}

const CaseRecord* StudySession::find_record(Phase p, const std::string& case_id) const {
    return const_cast<StudySession*>(this)->find_record(p, case_id);
}

void to_json(json& j, const StudySession& s) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json expired = json::array();
    for (auto p : s.expired_phases) expired.push_back(to_string(p));
    j = json{{"participant_id", s.participant_id},
             {"module", to_string(s.module)},
             {"group", to_string(s.group)},
             {"phase", to_string(s.phase)},
             {"phase_started", s.phase_started},
             {"case_ids", s.case_ids},
             {"cursor", s.cursor},
             {"phase_started_at", opt(s.phase_started_at)},
             {"deadline", opt(s.deadline)},
             {"expired_phases", expired},
             {"records", s.records}};
}

void from_json(const json& j, StudySession& s) {
    s.participant_id = require_field<std::string>(j, "participant_id");
    s.module = parse_module(require_field<std::string>(j, "module"));
    s.group = parse_group(require_field<std::string>(j, "group"));
    s.phase = parse_phase(require_field<std::string>(j, "phase"));
    s.phase_started = j.value("phase_started", false);
    s.case_ids = j.value("case_ids", std::vector<std::string>{});
    s.cursor = j.value("cursor", std::size_t{0});
    auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<double>();
    };
    s.phase_started_at = opt("phase_started_at");
    s.deadline = opt("deadline");
    s.expired_phases.clear();
    for (const auto& p : j.value("expired_phases", json::array())) s.expired_phases.push_back(parse_phase(p.get<std::string>()));
    s.records = j.value("records", std::vector<CaseRecord>{});
}

std::optional<Phase> successor(Phase p) {
    switch (p) {
        case Phase::pretest: return Phase::learning;
        case Phase::learning: return Phase::posttest;
        case Phase::posttest: return Phase::done;
        case Phase::done: return std::nullopt;
    }
    return std::nullopt;
}

bool is_test_phase(Phase p) { return p == Phase::pretest || p == Phase::posttest; }

const CuratedSet& StudyPlan::set(Module m, Phase p) const {
    const auto& s = sets(m);
    switch (p) {
        case Phase::pretest: return s.pretest;
        case Phase::learning: return s.learning;
        case Phase::posttest: return s.posttest;
        case Phase::done: break;
    }
    throw Error(ErrorCode::invalid_argument, "the done phase has no case set");
}

namespace {

json sets_json(const StudySets& s) {
    return json{{"pretest", s.pretest}, {"learning", s.learning}, {"posttest", s.posttest}};
}

StudySets sets_from(const json& j) {
    StudySets s;
    s.pretest = require_field<CuratedSet>(j, "pretest");
    s.learning = require_field<CuratedSet>(j, "learning");
    s.posttest = require_field<CuratedSet>(j, "posttest");
    if (s.pretest.case_ids != s.posttest.case_ids) {
        throw Error(ErrorCode::schema_violation, "posttest cases must equal pretest cases");
    }
    return s;
}

}  // namespace

void to_json(json& j, const StudyPlan& p) {
    j = json{{"localize", sets_json(p.localize)},
             {"report", sets_json(p.report)},
             {"test_minutes", p.test_minutes},
             {"iou_threshold", p.iou_threshold}};
}

void from_json(const json& j, StudyPlan& p) {
    p.localize = sets_from(require_field<json>(j, "localize"));
    p.report = sets_from(require_field<json>(j, "report"));
    p.test_minutes = j.value("test_minutes", 45.0);
    p.iou_threshold = j.value("iou_threshold", 0.25);
    if (!(p.test_minutes > 0)) throw Error(ErrorCode::schema_violation, "test_minutes must be > 0");
    if (!(p.iou_threshold > 0 && p.iou_threshold < 1)) {
        throw Error(ErrorCode::schema_violation, "iou_threshold must be in (0, 1)");
    }
}

}  // namespace radgame
