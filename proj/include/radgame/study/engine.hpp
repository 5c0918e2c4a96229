#pragma once

#include <map>
#include <memory>
#include <shared_mutex>

#include "radgame/analytics/analytics.hpp"
#include "radgame/gateway/gateway.hpp"
#include "radgame/ingest/taxonomy.hpp"
#include "radgame/localize/grading.hpp"
#include "radgame/report/assessment.hpp"
#include "radgame/study/study.hpp"

namespace radgame {

struct StudyDatasets {
    TaxonomyConfig taxonomy = TaxonomyConfig::default_taxonomy();
    std::vector<LocalizeCase> localize_cases;
    std::vector<ReportCase> report_cases;
};

struct EngineOptions {
    FeedbackOptions feedback;
    bool auto_advance = true;  // advance once the last case of a phase is submitted
};

// Event-sourced study driver. Every mutation is validated, appended to the
// event sink, then applied; replay applies the same events without side
// effects, so a replayed engine's snapshot() equals the live one. Mutations
// of one participant are serialized by that participant's mutex.
class StudyEngine {
public:
    StudyEngine(StudyDatasets data, std::shared_ptr<EventSink> sink, Gateway* gateway = nullptr,
                std::shared_ptr<StudyClock> clock = std::make_shared<StudyClock>(), EngineOptions options = {});

    // Checks that every curated case exists in the datasets.
    void initialize(const StudyPlan& plan);
    bool initialized() const;
    StudyPlan plan() const;

    void register_participant(const std::string& participant_id, const std::string& token_sha256 = "");
    // Assigns every registered participant that has no assignment yet.
    std::vector<ParticipantAssignment> assign(std::uint64_t seed);

    std::vector<std::string> participants() const;
    bool has_participant(const std::string& participant_id) const;
    std::optional<std::string> participant_for_token(const std::string& token_sha256) const;
    ParticipantAssignment assignment(const std::string& participant_id) const;
    StudySession session(const std::string& participant_id, Module module) const;
    // Localize until its session is Done, then Report.
    Module active_module(const std::string& participant_id) const;

    StudySession start_phase(const std::string& participant_id, Module module, Phase phase);
    StudySession advance(const std::string& participant_id, Module module);

    // Current case payload, or null when the phase is not started or exhausted.
    json next_case(const std::string& participant_id, Module module);

    // Responses: test phases return an acknowledgment only; Learning returns
    // grade and feedback (Gamified) or ground truth (Traditional).
    json submit_localize(const std::string& participant_id, const LocalizeSubmission& submission,
                         const std::string& idempotency_key = "");
    json submit_report(const std::string& participant_id, const std::string& case_id, const std::string& candidate,
                       const std::string& idempotency_key = "");

    // Learning-phase response for an already submitted case.
    json feedback(const std::string& participant_id, const std::string& case_id) const;

    // Finalizes every timed phase whose deadline has passed. Returns phases finalized.
    std::size_t expire_overdue();

    std::size_t pending_count() const;
    // Re-asks the judge for report grades that failed; returns the number resolved.
    std::size_t rejudge_pending();

    ReportGrade override_report(const std::string& participant_id, Phase phase, const std::string& case_id,
                                const std::vector<Override>& overrides);

    void record_review(const FeedbackReview& review);
    ReviewRates review_rates(const ReviewFilter& filter = {}) const;
    std::string reviews_csv() const;

    // One row per participant and module with complete pre and post tests.
    std::vector<OutcomeRow> outcomes() const;
    // Learning case times in sequence order per session of the module.
    std::vector<std::vector<double>> learning_times(Module module, std::optional<Group> group = std::nullopt) const;

    json snapshot() const;

    // Rebuilds state from events; the engine must be fresh.
    void replay(const std::vector<StudyEvent>& events);

    const StudyDatasets& datasets() const { return data_; }

private:
    struct Participant {
        mutable std::mutex mutex;
        std::string id;
        std::string token_sha256;
        std::optional<ParticipantAssignment> assignment;
        StudySession localize;
        StudySession report;

        StudySession& session(Module m) { return m == Module::localize ? localize : report; }
        const StudySession& session(Module m) const { return m == Module::localize ? localize : report; }
    };

    Participant& participant(const std::string& id) const;
    void emit(StudyEvent event);
    void apply(const StudyEvent& event);
    void apply_session_event(Participant& p, const StudyEvent& event);

    void check_deadline_locked(Participant& p, Module module);
    void finalize_phase_locked(Participant& p, Module module, double now);
    void maybe_advance_locked(Participant& p, Module module);
    StudyEvent session_event(const Participant& p, Module module, std::string type, json payload) const;

    CaseRecord grade_localize(const StudySession& s, const LocalizeSubmission& submission, double now) const;
    CaseRecord grade_report(const StudySession& s, const std::string& case_id, const std::string& candidate,
                            double now) const;
    json response_for(const StudySession& s, const CaseRecord& r) const;

    const LocalizeCase& localize_case(const std::string& id) const;
    const ReportCase& report_case(const std::string& id) const;

    StudyDatasets data_;
    std::map<std::string, std::size_t> localize_index_;
    std::map<std::string, std::size_t> report_index_;
    std::shared_ptr<EventSink> sink_;
    Gateway* gateway_;
    std::shared_ptr<StudyClock> clock_;
    EngineOptions options_;

    mutable std::shared_mutex registry_mutex_;
    std::optional<StudyPlan> plan_;
    std::map<std::string, std::unique_ptr<Participant>> participants_;
    ReviewStore reviews_;
};

}  // namespace radgame
