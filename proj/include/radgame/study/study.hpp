#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"
#include "radgame/feedback/feedback.hpp"
#include "radgame/ingest/ingest.hpp"

namespace radgame {

struct ParticipantAssignment {
    std::string participant_id;
    Group localize_group = Group::gamified;
    Group report_group = Group::traditional;

    Group group_for(Module m) const { return m == Module::localize ? localize_group : report_group; }

    friend bool operator==(const ParticipantAssignment&, const ParticipantAssignment&) = default;
};

void to_json(json& j, const ParticipantAssignment& a);
void from_json(const json& j, ParticipantAssignment& a);

// Seeded balanced split: ceil(n/2) Gamified-Localize, floor(n/2)
// Traditional-Localize, report group always the opposite. Output follows
// the input order. Throws Error(invalid_argument) for an empty list and
// Error(duplicate_id) for repeated ids.
std::vector<ParticipantAssignment> assign_groups(const std::vector<std::string>& participant_ids, std::uint64_t seed);

// Wall clock in seconds since the epoch.
class StudyClock {
public:
    virtual ~StudyClock() = default;
    virtual double now() const;
};

class ManualStudyClock : public StudyClock {
public:
    explicit ManualStudyClock(double start = 1'700'000'000.0) : t_(start) {}
    double now() const override { return t_.load(); }
    void set(double t) { t_.store(t); }
    void advance(double seconds) { t_.store(t_.load() + seconds); }

private:
    std::atomic<double> t_;
};

struct StudyEvent {
    double ts = 0.0;
    std::string participant_id;    // empty for study-level events
    std::optional<Module> module;  // absent for participant-level events
    std::string event_type;
    json payload = json::object();

    friend bool operator==(const StudyEvent&, const StudyEvent&) = default;
};

void to_json(json& j, const StudyEvent& e);
void from_json(const json& j, StudyEvent& e);

class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void append(const StudyEvent& event) = 0;
};

class MemoryEventLog : public EventSink {
public:
    void append(const StudyEvent& event) override;
    std::vector<StudyEvent> events() const;

private:
    mutable std::mutex mutex_;
    std::vector<StudyEvent> events_;
};

// One JSON object per line, flushed after every append.
class JsonlEventLog : public EventSink {
public:
    explicit JsonlEventLog(std::filesystem::path path);
    void append(const StudyEvent& event) override;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
    std::ofstream out_;
};

std::vector<StudyEvent> read_event_log(const std::filesystem::path& path);

enum class CaseStatus { graded, pending, recorded, unanswered };
std::string_view to_string(CaseStatus s);
CaseStatus parse_case_status(std::string_view text);

struct CaseRecord {
    std::string case_id;
    Phase phase = Phase::pretest;
    std::size_t index = 0;  // position within the phase
    double started_at = 0.0;
    double submitted_at = 0.0;
    double elapsed_seconds = 0.0;
    json submission;            // LocalizeSubmission, or {"candidate": text}
    std::optional<json> grade;  // LocalizeCaseResult or ReportGrade
    CaseStatus status = CaseStatus::recorded;
    std::vector<FeedbackItem> feedback;
    std::string idempotency_key;

    friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

void to_json(json& j, const CaseRecord& r);
void from_json(const json& j, CaseRecord& r);

struct StudySession {
    std::string participant_id;
    Module module = Module::localize;
    Group group = Group::gamified;
    Phase phase = Phase::pretest;
    bool phase_started = false;
    std::vector<std::string> case_ids;  // current phase
    std::size_t cursor = 0;
    std::optional<double> phase_started_at;
    std::optional<double> deadline;
    std::vector<Phase> expired_phases;
    std::vector<CaseRecord> records;

    bool exhausted() const { return phase_started && cursor >= case_ids.size(); }
    const std::string* current_case() const;
    std::vector<const CaseRecord*> records_in(Phase p) const;
    CaseRecord* find_record(Phase p, const std::string& case_id);
    const CaseRecord* find_record(Phase p, const std::string& case_id) const;

    friend bool operator==(const StudySession&, const StudySession&) = default;
};

void to_json(json& j, const StudySession& s);
void from_json(const json& j, StudySession& s);

std::optional<Phase> successor(Phase p);
bool is_test_phase(Phase p);

struct StudyPlan {
    StudySets localize;
    StudySets report;
    double test_minutes = 45.0;
    double iou_threshold = 0.25;

    const StudySets& sets(Module m) const { return m == Module::localize ? localize : report; }
    const CuratedSet& set(Module m, Phase p) const;
};

void to_json(json& j, const StudyPlan& p);
void from_json(const json& j, StudyPlan& p);

}  // namespace radgame
