#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "radgame/core/error.hpp"
#include "radgame/localize/grading.hpp"
#include "radgame/study/engine.hpp"

namespace radgame {

std::string_view radgame_version();

// All routes live under this prefix.
inline constexpr const char* kApiPrefix = "/api/v1";

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path image_root;
    std::filesystem::path overlay_root;
    std::string operator_token;           // empty disables operator endpoints
    double sweep_interval_seconds = 5.0;  // deadline expiry and re-judge sweep; 0 disables
    std::size_t time_curve_bin_localize = 25;
    std::size_t time_curve_bin_report = 10;
};

int http_status_for(ErrorCode code);

// Error body: {"code", "message", "detail"}.
json error_body(const Error& e);

// Strict body parser reporting the offending field path in Error::detail,
// e.g. "entries[0].boxes[1].x_max" or "entries[0].boxes[1]: x_min < x_max".
LocalizeSubmission parse_localize_submission(const json& body, const TaxonomyConfig& taxonomy);

struct RouteDoc {
    std::string method;
    std::string path;  // relative to kApiPrefix, OpenAPI template syntax
    std::string summary;
    std::string auth;  // "none", "participant", "operator"
    json request_body;  // example, or null
    json responses;     // status -> description
};

const std::vector<RouteDoc>& route_table();
json openapi_document();

// Session view without per-case records, so no score can leak through it.
json session_summary(const StudyEngine& engine, const std::string& participant_id);

class ApiServer {
public:
    ApiServer(StudyEngine& engine, ServerOptions options);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Returns the bound port. Throws Error(io_error) when the port is busy.
    int bind();
    // Serves until stop(); call bind() first.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace radgame
