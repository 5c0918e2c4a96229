#include <algorithm>
#include <cctype>
#include <cmath>

#include "radgame/core/error.hpp"
#include "radgame/report/judge.hpp"
#include "radgame/study/engine.hpp"

namespace radgame {

namespace {

namespace ev {
constexpr const char* study_initialized = "study_initialized";
constexpr const char* participant_registered = "participant_registered";
constexpr const char* group_assigned = "group_assigned";
constexpr const char* phase_started = "phase_started";
constexpr const char* case_submitted = "case_submitted";
constexpr const char* phase_expired = "phase_expired";
constexpr const char* phase_advanced = "phase_advanced";
constexpr const char* case_rejudged = "case_rejudged";
constexpr const char* report_overridden = "report_overridden";
constexpr const char* feedback_reviewed = "feedback_reviewed";
}  // namespace ev

std::optional<double> opt_double(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

ReportGrade unanswered_report_grade() {
    CrimsonAssessment a;
    a.explanation = "No report was submitted.";
    a.errors[static_cast<std::size_t>(ErrorCategory::b)].push_back("reference findings not reported");
    return make_grade(a);
}

}  // namespace

StudyEngine::StudyEngine(StudyDatasets data, std::shared_ptr<EventSink> sink, Gateway* gateway,
                         std::shared_ptr<StudyClock> clock, EngineOptions options)
    : data_(std::move(data)),
      sink_(std::move(sink)),
      gateway_(gateway),
      clock_(clock ? std::move(clock) : std::make_shared<StudyClock>()),
      options_(std::move(options)) {
    for (std::size_t i = 0; i < data_.localize_cases.size(); ++i) {
        if (!localize_index_.emplace(data_.localize_cases[i].case_id, i).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate localize case '" + data_.localize_cases[i].case_id + "'");
        }
    }
    for (std::size_t i = 0; i < data_.report_cases.size(); ++i) {
        if (!report_index_.emplace(data_.report_cases[i].case_id, i).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate report case '" + data_.report_cases[i].case_id + "'");
        }
    }
}

const LocalizeCase& StudyEngine::localize_case(const std::string& id) const {
    auto it = localize_index_.find(id);
    if (it == localize_index_.end()) throw Error(ErrorCode::not_found, "unknown localize case '" + id + "'");
    return data_.localize_cases[it->second];
}

const ReportCase& StudyEngine::report_case(const std::string& id) const {
    auto it = report_index_.find(id);
    if (it == report_index_.end()) throw Error(ErrorCode::not_found, "unknown report case '" + id + "'");
    return data_.report_cases[it->second];
}

void StudyEngine::emit(StudyEvent event) {
    if (sink_) sink_->append(event);
    apply(event);
}

StudyEvent StudyEngine::session_event(const Participant& p, Module module, std::string type, json payload) const {
    StudyEvent e;
    e.ts = clock_->now();
    e.participant_id = p.id;
    e.module = module;
    e.event_type = std::move(type);
    e.payload = std::move(payload);
    return e;
}

StudyEngine::Participant& StudyEngine::participant(const std::string& id) const {
    auto it = participants_.find(id);
    if (it == participants_.end()) throw Error(ErrorCode::not_found, "unknown participant '" + id + "'");
    return *it->second;
}

void StudyEngine::apply(const StudyEvent& e) {
    if (e.event_type == ev::study_initialized) {
        plan_ = e.payload.at("plan").get<StudyPlan>();
    } else if (e.event_type == ev::participant_registered) {
        auto p = std::make_unique<Participant>();
        p->id = e.participant_id;
        p->token_sha256 = e.payload.value("token_sha256", std::string());
        participants_[e.participant_id] = std::move(p);
    } else if (e.event_type == ev::group_assigned) {
        auto& p = participant(e.participant_id);
        const auto a = e.payload.at("assignment").get<ParticipantAssignment>();
        p.assignment = a;
        for (Module m : {Module::localize, Module::report}) {
            StudySession s;
            s.participant_id = p.id;
            s.module = m;
            s.group = a.group_for(m);
            p.session(m) = s;
        }
    } else if (e.event_type == ev::feedback_reviewed) {
        reviews_.record_review(e.payload.at("review").get<FeedbackReview>());
    } else if (e.module) {
        apply_session_event(participant(e.participant_id), e);
    } else {
        throw Error(ErrorCode::parse_error, "unknown event type '" + e.event_type + "'");
    }
}

void StudyEngine::apply_session_event(Participant& p, const StudyEvent& e) {
    StudySession& s = p.session(*e.module);
    const json& pl = e.payload;
    if (e.event_type == ev::phase_started) {
        s.phase = parse_phase(pl.at("phase").get<std::string>());
        s.phase_started = true;
        s.case_ids = pl.at("case_ids").get<std::vector<std::string>>();
        s.cursor = 0;
        s.phase_started_at = pl.at("started_at").get<double>();
        s.deadline = opt_double(pl, "deadline");
    } else if (e.event_type == ev::case_submitted) {
        auto record = pl.at("record").get<CaseRecord>();
        for (const auto& item : record.feedback) reviews_.register_item(item);
        s.records.push_back(std::move(record));
        ++s.cursor;
    } else if (e.event_type == ev::phase_expired) {
        s.expired_phases.push_back(parse_phase(pl.at("phase").get<std::string>()));
    } else if (e.event_type == ev::phase_advanced) {
        s.phase = parse_phase(pl.at("to").get<std::string>());
        s.phase_started = false;
        s.case_ids.clear();
        s.cursor = 0;
        s.phase_started_at.reset();
        s.deadline.reset();
    } else if (e.event_type == ev::case_rejudged || e.event_type == ev::report_overridden) {
        CaseRecord* r = s.find_record(parse_phase(pl.at("phase").get<std::string>()), pl.at("case_id").get<std::string>());
        if (!r) throw Error(ErrorCode::dangling_reference, e.event_type + " for an unknown case record");
        r->grade = pl.at("grade");
        r->status = CaseStatus::graded;
    } else {
        throw Error(ErrorCode::parse_error, "unknown event type '" + e.event_type + "'");
    }
}

void StudyEngine::initialize(const StudyPlan& plan) {
    std::unique_lock lock(registry_mutex_);
    if (plan_) throw Error(ErrorCode::illegal_transition, "study is already initialized");
    for (Module m : {Module::localize, Module::report}) {
        for (Phase ph : {Phase::pretest, Phase::learning, Phase::posttest}) {
            for (const auto& id : plan.set(m, ph).case_ids) {
                if (m == Module::localize) {
                    localize_case(id);
                } else {
                    report_case(id);
                }
            }
        }
        if (plan.sets(m).pretest.case_ids != plan.sets(m).posttest.case_ids) {
            throw Error(ErrorCode::invalid_argument, "posttest cases must equal pretest cases");
        }
    }
    StudyEvent e;
    e.ts = clock_->now();
    e.event_type = ev::study_initialized;
    e.payload = json{{"plan", plan}};
    emit(std::move(e));
}

bool StudyEngine::initialized() const {
    std::shared_lock lock(registry_mutex_);
    return plan_.has_value();
}

StudyPlan StudyEngine::plan() const {
    std::shared_lock lock(registry_mutex_);
    if (!plan_) throw Error(ErrorCode::config_error, "study is not initialized");
    return *plan_;
}

void StudyEngine::register_participant(const std::string& participant_id, const std::string& token_sha256) {
    if (participant_id.empty()) throw Error(ErrorCode::invalid_argument, "participant id must not be empty");
    std::unique_lock lock(registry_mutex_);
    if (participants_.count(participant_id)) {
        throw Error(ErrorCode::duplicate_id, "participant '" + participant_id + "' already exists");
    }
    StudyEvent e;
    e.ts = clock_->now();
    e.participant_id = participant_id;
    e.event_type = ev::participant_registered;
    e.payload = json{{"token_sha256", token_sha256}};
    emit(std::move(e));
}

std::vector<ParticipantAssignment> StudyEngine::assign(std::uint64_t seed) {
    std::unique_lock lock(registry_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, p] : participants_) {
        if (!p->assignment) ids.push_back(id);
    }
    if (ids.empty()) throw Error(ErrorCode::invalid_argument, "no unassigned participants");
    auto out = assign_groups(ids, seed);
    for (const auto& a : out) {
        StudyEvent e;
        e.ts = clock_->now();
        e.participant_id = a.participant_id;
        e.event_type = ev::group_assigned;
        e.payload = json{{"assignment", a}, {"seed", seed}};
        emit(std::move(e));
    }
    return out;
}

std::vector<std::string> StudyEngine::participants() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, p] : participants_) out.push_back(id);
    return out;
}

bool StudyEngine::has_participant(const std::string& participant_id) const {
    std::shared_lock lock(registry_mutex_);
    return participants_.count(participant_id) > 0;
}

std::optional<std::string> StudyEngine::participant_for_token(const std::string& token_sha256) const {
    if (token_sha256.empty()) return std::nullopt;
    std::shared_lock lock(registry_mutex_);
    for (const auto& [id, p] : participants_) {
        if (p->token_sha256 == token_sha256) return id;
    }
    return std::nullopt;
}

ParticipantAssignment StudyEngine::assignment(const std::string& participant_id) const {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::not_found, "participant '" + participant_id + "' is not assigned");
    return *p.assignment;
}

StudySession StudyEngine::session(const std::string& participant_id, Module module) const {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::not_found, "participant '" + participant_id + "' is not assigned");
    return p.session(module);
}

Module StudyEngine::active_module(const std::string& participant_id) const {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    return p.localize.phase == Phase::done ? Module::report : Module::localize;
}

StudySession StudyEngine::start_phase(const std::string& participant_id, Module module, Phase phase) {
    std::shared_lock reg(registry_mutex_);
    if (!plan_) throw Error(ErrorCode::config_error, "study is not initialized");
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::illegal_transition, "participant '" + participant_id + "' is not assigned");
    if (module == Module::report && p.localize.phase != Phase::done) {
        throw Error(ErrorCode::module_locked, "the Report module opens after the Localize module is done");
    }
    StudySession& s = p.session(module);
    if (phase == Phase::done || phase != s.phase || s.phase_started) {
        throw Error(ErrorCode::illegal_transition,
                    "cannot start " + std::string(to_string(phase)) + " from " + std::string(to_string(s.phase)) +
                        (s.phase_started ? " (started)" : " (not started)"));
    }
    const double now = clock_->now();
    json payload{{"phase", to_string(phase)},
                 {"started_at", now},
                 {"case_ids", plan_->set(module, phase).case_ids},
                 {"deadline", nullptr}};
    if (is_test_phase(phase)) payload["deadline"] = now + plan_->test_minutes * 60.0;
    auto e = session_event(p, module, ev::phase_started, std::move(payload));
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    maybe_advance_locked(p, module);
    return s;
}

void StudyEngine::maybe_advance_locked(Participant& p, Module module) {
    StudySession& s = p.session(module);
    if (!options_.auto_advance || !s.exhausted()) return;
    auto e = session_event(p, module, ev::phase_advanced,
                           json{{"from", to_string(s.phase)}, {"to", to_string(*successor(s.phase))}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
}

StudySession StudyEngine::advance(const std::string& participant_id, Module module) {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::illegal_transition, "participant '" + participant_id + "' is not assigned");
    StudySession& s = p.session(module);
    if (s.phase == Phase::done) throw Error(ErrorCode::illegal_transition, "the module is already done");
    if (!s.exhausted()) {
        const std::size_t total = plan_ ? plan_->set(module, s.phase).case_ids.size() : 0;
        const std::size_t remaining = s.phase_started ? s.case_ids.size() - s.cursor : total;
        throw Error(ErrorCode::cases_remaining, std::to_string(remaining) + " cases remaining in " +
                                                    std::string(to_string(s.phase)));
    }
    auto e = session_event(p, module, ev::phase_advanced,
                           json{{"from", to_string(s.phase)}, {"to", to_string(*successor(s.phase))}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    return s;
}

void StudyEngine::check_deadline_locked(Participant& p, Module module) {
    StudySession& s = p.session(module);
    if (!s.phase_started || !s.deadline || s.exhausted()) return;
    const double now = clock_->now();
    if (now > *s.deadline) finalize_phase_locked(p, module, now);
}

void StudyEngine::finalize_phase_locked(Participant& p, Module module, double now) {
    (void)now;
    StudySession& s = p.session(module);
    const Phase phase = s.phase;
    while (const std::string* id = s.current_case()) {
        CaseRecord r;
        r.case_id = *id;
        r.phase = phase;
        r.index = s.cursor;
        r.started_at = *s.deadline;
        r.submitted_at = *s.deadline;
        r.status = CaseStatus::unanswered;
        if (module == Module::localize) {
            LocalizeSubmission empty;
            empty.case_id = *id;
            r.submission = empty;
            r.grade = json(grade_case(empty, localize_case(*id), data_.taxonomy, plan_->iou_threshold));
        } else {
            r.submission = json{{"candidate", ""}};
            r.grade = json(unanswered_report_grade());
        }
        auto e = session_event(p, module, ev::case_submitted, json{{"record", r}});
        if (sink_) sink_->append(e);
        apply_session_event(p, e);
    }
    auto e = session_event(p, module, ev::phase_expired, json{{"phase", to_string(phase)}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    maybe_advance_locked(p, module);
}

std::size_t StudyEngine::expire_overdue() {
    std::shared_lock reg(registry_mutex_);
    std::size_t count = 0;
    for (auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        if (!p->assignment) continue;
        for (Module m : {Module::localize, Module::report}) {
            const auto before = p->session(m).expired_phases.size();
            check_deadline_locked(*p, m);
            count += p->session(m).expired_phases.size() - before;
        }
    }
    return count;
}

json StudyEngine::next_case(const std::string& participant_id, Module module) {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::illegal_transition, "participant '" + participant_id + "' is not assigned");
    check_deadline_locked(p, module);
    const StudySession& s = p.session(module);
    const std::string* id = s.current_case();
    if (!id) return nullptr;
    json out{{"module", to_string(module)},
             {"phase", to_string(s.phase)},
             {"group", to_string(s.group)},
             {"case_id", *id},
             {"index", s.cursor},
             {"total", s.case_ids.size()},
             {"deadline", s.deadline ? json(*s.deadline) : json(nullptr)}};
    if (module == Module::localize) {
        const auto& c = localize_case(*id);
        out["image_ref"] = c.image_ref;
        out["image_width_px"] = c.image_width_px;
        out["image_height_px"] = c.image_height_px;
        json draw = json::array(), select = json::array();
        for (const auto& cls : data_.taxonomy.classes()) {
            json entry{{"id", cls.id}, {"display_name", cls.display_name}};
            (cls.mode == FindingMode::draw ? draw : select).push_back(entry);
        }
        out["draw_findings"] = draw;
        out["select_findings"] = select;
    } else {
        const auto& c = report_case(*id);
        out["image_refs"] = c.image_refs;
        out["age_years"] = c.age_years;
        out["indication"] = c.indication;
    }
    return out;
}

CaseRecord StudyEngine::grade_localize(const StudySession& s, const LocalizeSubmission& submission, double now) const {
    const auto& c = localize_case(submission.case_id);
    CaseRecord r;
    r.case_id = c.case_id;
    r.phase = s.phase;
    r.index = s.cursor;
    const auto prior = s.records_in(s.phase);
    r.started_at = prior.empty() ? *s.phase_started_at : prior.back()->submitted_at;
    r.submitted_at = now;
    r.elapsed_seconds = std::max(0.0, now - r.started_at);
    r.submission = submission;
    const auto result = grade_case(submission, c, data_.taxonomy, plan_->iou_threshold);
    r.grade = json(result);
    r.status = CaseStatus::graded;
    if (s.phase == Phase::learning && s.group == Group::gamified) {
        r.feedback = generate_feedback(c, result, data_.taxonomy, gateway_, options_.feedback);
        for (auto& item : r.feedback) item.item_id = s.participant_id + "/" + item.item_id;
    }
    return r;
}

CaseRecord StudyEngine::grade_report(const StudySession& s, const std::string& case_id, const std::string& candidate,
                                     double now) const {
    const auto& c = report_case(case_id);
    CaseRecord r;
    r.case_id = case_id;
    r.phase = s.phase;
    r.index = s.cursor;
    const auto prior = s.records_in(s.phase);
    r.started_at = prior.empty() ? *s.phase_started_at : prior.back()->submitted_at;
    r.submitted_at = now;
    r.elapsed_seconds = std::max(0.0, now - r.started_at);
    r.submission = json{{"candidate", candidate}};
    if (s.phase == Phase::learning && s.group == Group::traditional) {
        r.status = CaseStatus::recorded;
    } else if (blank(candidate)) {
        r.status = CaseStatus::unanswered;
        r.grade = json(unanswered_report_grade());
    } else if (!gateway_) {
        r.status = CaseStatus::pending;
    } else {
        try {
            ReportJudge judge(*gateway_);
            r.grade = json(judge.grade(c, candidate));
            r.status = CaseStatus::graded;
        } catch (const Error&) {
            r.status = CaseStatus::pending;
        }
    }
    return r;
}

json StudyEngine::response_for(const StudySession& s, const CaseRecord& r) const {
    const std::size_t total = plan_->set(s.module, r.phase).case_ids.size();
    json out{{"module", to_string(s.module)},
             {"phase", to_string(r.phase)},
             {"case_id", r.case_id},
             {"index", r.index},
             {"remaining", total - r.index - 1},
             {"elapsed_seconds", r.elapsed_seconds}};
    if (is_test_phase(r.phase)) {
        out["status"] = "recorded";
        return out;
    }
    if (s.module == Module::localize) {
        const auto& c = localize_case(r.case_id);
        json gt = json::array();
        for (const auto& a : c.annotations) {
            const auto& cls = data_.taxonomy.at(a.class_id);
            gt.push_back(json{{"class_id", a.class_id},
                              {"display_name", cls.display_name},
                              {"mode", to_string(cls.mode)},
                              {"boxes", a.boxes}});
        }
        out["image_ref"] = c.image_ref;
        out["ground_truth"] = gt;
        if (s.group == Group::gamified) {
            out["status"] = "graded";
            out["grade"] = *r.grade;
            out["feedback"] = r.feedback;
        } else {
            out["status"] = "recorded";
        }
        return out;
    }
    const auto& c = report_case(r.case_id);
    out["ground_truth_findings"] = c.reference_findings;
    if (s.group == Group::traditional) {
        out["status"] = "recorded";
        return out;
    }
    if (r.status == CaseStatus::pending || !r.grade) {
        out["status"] = "score_pending";
        out["score_pending"] = true;
        return out;
    }
    const auto g = r.grade->get<ReportGrade>();
    out["status"] = "graded";
    out["score_pending"] = false;
    out["crimson_percent"] = g.crimson_percent;
    out["style_percent"] = g.style_percent ? json(*g.style_percent) : json(nullptr);
    const json assessment = g.assessment;
    out["explanation"] = g.assessment.explanation;
    out["errors"] = assessment.at("ClinicallySignificantErrors");
    out["matched_findings"] = g.assessment.matched_findings;
    out["style"] = g.style_assessment ? json(*g.style_assessment) : json(nullptr);
    return out;
}

json StudyEngine::submit_localize(const std::string& participant_id, const LocalizeSubmission& submission,
                                  const std::string& idempotency_key) {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::illegal_transition, "participant '" + participant_id + "' is not assigned");
    StudySession& s = p.session(Module::localize);
    if (!idempotency_key.empty()) {
        for (const auto& r : s.records) {
            if (r.idempotency_key == idempotency_key) return response_for(s, r);
        }
    }
    if (!s.phase_started) throw Error(ErrorCode::illegal_transition, "no Localize phase is running");
    const double now = clock_->now();
    if (s.deadline && now > *s.deadline) {
        finalize_phase_locked(p, Module::localize, now);
        throw Error(ErrorCode::deadline_passed, "the test deadline has passed; the phase was finalized");
    }
    if (s.find_record(s.phase, submission.case_id)) {
        throw Error(ErrorCode::duplicate_submission, "case '" + submission.case_id + "' was already submitted");
    }
    const std::string* current = s.current_case();
    if (!current || *current != submission.case_id) {
        throw Error(ErrorCode::wrong_case, "expected case '" + (current ? *current : std::string("none")) + "'",
                    submission.case_id);
    }
    CaseRecord r = grade_localize(s, submission, now);
    r.idempotency_key = idempotency_key;
    auto e = session_event(p, Module::localize, ev::case_submitted, json{{"record", r}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    json response = response_for(s, s.records.back());
    maybe_advance_locked(p, Module::localize);
    return response;
}

json StudyEngine::submit_report(const std::string& participant_id, const std::string& case_id,
                                const std::string& candidate, const std::string& idempotency_key) {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::illegal_transition, "participant '" + participant_id + "' is not assigned");
    StudySession& s = p.session(Module::report);
    if (!idempotency_key.empty()) {
        for (const auto& r : s.records) {
            if (r.idempotency_key == idempotency_key) return response_for(s, r);
        }
    }
    if (!s.phase_started) throw Error(ErrorCode::illegal_transition, "no Report phase is running");
    const double now = clock_->now();
    if (s.deadline && now > *s.deadline) {
        finalize_phase_locked(p, Module::report, now);
        throw Error(ErrorCode::deadline_passed, "the test deadline has passed; the phase was finalized");
    }
    if (s.find_record(s.phase, case_id)) {
        throw Error(ErrorCode::duplicate_submission, "case '" + case_id + "' was already submitted");
    }
    const std::string* current = s.current_case();
    if (!current || *current != case_id) {
        throw Error(ErrorCode::wrong_case, "expected case '" + (current ? *current : std::string("none")) + "'",
                    case_id);
    }
    CaseRecord r = grade_report(s, case_id, candidate, now);
    r.idempotency_key = idempotency_key;
    auto e = session_event(p, Module::report, ev::case_submitted, json{{"record", r}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    json response = response_for(s, s.records.back());
    maybe_advance_locked(p, Module::report);
    return response;
}

json StudyEngine::feedback(const std::string& participant_id, const std::string& case_id) const {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::not_found, "participant '" + participant_id + "' is not assigned");
    for (Module m : {Module::localize, Module::report}) {
        const StudySession& s = p.session(m);
        if (const CaseRecord* r = s.find_record(Phase::learning, case_id)) return response_for(s, *r);
    }
    throw Error(ErrorCode::not_found, "no learning feedback for case '" + case_id + "'");
}

std::size_t StudyEngine::pending_count() const {
    std::shared_lock reg(registry_mutex_);
    std::size_t n = 0;
    for (const auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        for (const auto& r : p->report.records) n += r.status == CaseStatus::pending;
    }
    return n;
}

std::size_t StudyEngine::rejudge_pending() {
    if (!gateway_) return 0;
    std::shared_lock reg(registry_mutex_);
    std::size_t resolved = 0;
    for (auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        std::vector<std::pair<Phase, std::string>> pending;
        for (const auto& r : p->report.records) {
            if (r.status == CaseStatus::pending) pending.emplace_back(r.phase, r.case_id);
        }
        for (const auto& [phase, case_id] : pending) {
            const CaseRecord* r = p->report.find_record(phase, case_id);
            ReportGrade grade;
            try {
                ReportJudge judge(*gateway_);
                grade = judge.grade(report_case(case_id), r->submission.at("candidate").get<std::string>());
            } catch (const Error&) {
                continue;
            }
            auto e = session_event(*p, Module::report, ev::case_rejudged,
                                   json{{"phase", to_string(phase)}, {"case_id", case_id}, {"grade", grade}});
            if (sink_) sink_->append(e);
            apply_session_event(*p, e);
            ++resolved;
        }
    }
    return resolved;
}

ReportGrade StudyEngine::override_report(const std::string& participant_id, Phase phase, const std::string& case_id,
                                         const std::vector<Override>& overrides) {
    std::shared_lock reg(registry_mutex_);
    auto& p = participant(participant_id);
    std::lock_guard lock(p.mutex);
    if (!p.assignment) throw Error(ErrorCode::not_found, "participant '" + participant_id + "' is not assigned");
    const CaseRecord* r = p.report.find_record(phase, case_id);
    if (!r) throw Error(ErrorCode::not_found, "no report submission for case '" + case_id + "'");
    if (r->status != CaseStatus::graded || !r->grade) {
        throw Error(ErrorCode::illegal_transition, "case '" + case_id + "' has no judged grade to override");
    }
    const ReportGrade updated = apply_overrides(r->grade->get<ReportGrade>(), overrides);
    auto e = session_event(p, Module::report, ev::report_overridden,
                           json{{"phase", to_string(phase)}, {"case_id", case_id}, {"grade", updated}});
    if (sink_) sink_->append(e);
    apply_session_event(p, e);
    return updated;
}

void StudyEngine::record_review(const FeedbackReview& review) {
    std::unique_lock lock(registry_mutex_);
    StudyEvent e;
    e.ts = clock_->now();
    e.event_type = ev::feedback_reviewed;
    e.payload = json{{"review", review}};
    reviews_.record_review(review);
    if (sink_) sink_->append(e);
}

ReviewRates StudyEngine::review_rates(const ReviewFilter& filter) const { return reviews_.aggregate_reviews(filter); }

std::string StudyEngine::reviews_csv() const { return reviews_.export_csv(); }

std::vector<OutcomeRow> StudyEngine::outcomes() const {
    std::shared_lock reg(registry_mutex_);
    std::vector<OutcomeRow> rows;
    if (!plan_) return rows;
    for (const auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        if (!p->assignment) continue;
        for (Module m : {Module::localize, Module::report}) {
            const StudySession& s = p->session(m);
            const std::size_t size = plan_->set(m, Phase::pretest).case_ids.size();
            const char* field = m == Module::localize ? "case_accuracy" : "crimson_percent";
            auto mean_score = [&](Phase ph) -> std::optional<double> {
                const auto recs = s.records_in(ph);
                if (recs.size() != size) return std::nullopt;
                double sum = 0;
                std::size_t n = 0;
                for (const auto* r : recs) {
                    if (!r->grade) continue;
                    sum += r->grade->at(field).get<double>();
                    ++n;
                }
                if (n == 0) return std::nullopt;
                return sum / static_cast<double>(n);
            };
            const auto pre = mean_score(Phase::pretest);
            const auto post = mean_score(Phase::posttest);
            if (!pre || !post) continue;
            OutcomeRow row;
            row.participant_id = id;
            row.module = m;
            row.group = s.group;
            row.pre_score = *pre;
            row.post_score = *post;
            for (const auto* r : s.records_in(Phase::learning)) row.total_learning_time_seconds += r->elapsed_seconds;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<std::vector<double>> StudyEngine::learning_times(Module module, std::optional<Group> group) const {
    std::shared_lock reg(registry_mutex_);
    std::vector<std::vector<double>> out;
    for (const auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        if (!p->assignment) continue;
        const StudySession& s = p->session(module);
        if (group && s.group != *group) continue;
        auto recs = s.records_in(Phase::learning);
        if (recs.empty()) continue;
        std::sort(recs.begin(), recs.end(), [](const CaseRecord* a, const CaseRecord* b) { return a->index < b->index; });
        std::vector<double> times;
        for (const auto* r : recs) times.push_back(r->elapsed_seconds);
        out.push_back(std::move(times));
    }
    return out;
}

json StudyEngine::snapshot() const {
    std::shared_lock reg(registry_mutex_);
    json participants = json::array();
    for (const auto& [id, p] : participants_) {
        std::lock_guard lock(p->mutex);
        json entry{{"participant_id", id}, {"token_sha256", p->token_sha256}};
        if (p->assignment) {
            entry["assignment"] = *p->assignment;
            entry["localize"] = p->localize;
            entry["report"] = p->report;
        } else {
            entry["assignment"] = nullptr;
        }
        participants.push_back(std::move(entry));
    }
    return json{{"plan", plan_ ? json(*plan_) : json(nullptr)},
                {"participants", participants},
                {"reviews", reviews_.reviews()}};
}

void StudyEngine::replay(const std::vector<StudyEvent>& events) {
    std::unique_lock lock(registry_mutex_);
    if (plan_ || !participants_.empty()) throw Error(ErrorCode::illegal_transition, "replay needs a fresh engine");
    for (const auto& e : events) apply(e);
}

}  // namespace radgame
