#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "radgame/core/domain.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

using json = nlohmann::json;

void to_json(json& j, const BoundingBox& b);
void from_json(const json& j, BoundingBox& b);
void to_json(json& j, const FindingClass& c);
void from_json(const json& j, FindingClass& c);
void to_json(json& j, const FindingAnnotation& a);
void from_json(const json& j, FindingAnnotation& a);
void to_json(json& j, const LocalizeCase& c);
void from_json(const json& j, LocalizeCase& c);
void to_json(json& j, const ReportCase& c);
void from_json(const json& j, ReportCase& c);

// Line-delimited JSON: one object per non-blank line. Parse failures name the
// offending line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

std::vector<LocalizeCase> read_localize_cases(const std::filesystem::path& path);
std::vector<ReportCase> read_report_cases(const std::filesystem::path& path);
void write_localize_cases(const std::filesystem::path& path, const std::vector<LocalizeCase>& cases);
void write_report_cases(const std::filesystem::path& path, const std::vector<ReportCase>& cases);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Typed field access with a path-qualified schema_violation on mismatch.
template <typename T>
T require_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::schema_violation, std::string("missing field '") + key + "'", key);
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::schema_violation, std::string("field '") + key + "' has the wrong type", key);
    }
}

}  // namespace radgame
