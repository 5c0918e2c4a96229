#include <chrono>

#include "radgame/core/error.hpp"
#include "radgame/study/study.hpp"

namespace radgame {

double StudyClock::now() const {
    using namespace std::chrono;
    return duration<double>(system_clock::now().time_since_epoch()).count();
}

void to_json(json& j, const StudyEvent& e) {
    j = json{{"ts", e.ts},
             {"participant_id", e.participant_id},
             {"module", e.module ? json(to_string(*e.module)) : json(nullptr)},
             {"event_type", e.event_type},
             {"payload", e.payload}};
}

void from_json(const json& j, StudyEvent& e) {
    e.ts = require_field<double>(j, "ts");
    e.participant_id = j.value("participant_id", std::string());
    e.module.reset();
    if (j.contains("module") && !j["module"].is_null()) e.module = parse_module(j["module"].get<std::string>());
    e.event_type = require_field<std::string>(j, "event_type");
    e.payload = j.value("payload", json::object());
}

void MemoryEventLog::append(const StudyEvent& event) {
    std::lock_guard lock(mutex_);
    events_.push_back(event);
}

std::vector<StudyEvent> MemoryEventLog::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

JsonlEventLog::JsonlEventLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorCode::io_error, "cannot open event log " + path_.string());
}

void JsonlEventLog::append(const StudyEvent& event) {
    const std::string line = json(event).dump() + "\n";
    std::lock_guard lock(mutex_);
    out_ << line;
    out_.flush();
    if (!out_) throw Error(ErrorCode::io_error, "cannot append to " + path_.string());
}

std::vector<StudyEvent> read_event_log(const std::filesystem::path& path) {
    std::vector<StudyEvent> events;
    if (!std::filesystem::exists(path)) return events;
    for (const auto& j : read_jsonl(path)) events.push_back(j.get<StudyEvent>());
    return events;
}

}  // namespace radgame
