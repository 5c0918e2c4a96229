#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radgame {

// Every failure surfaced by the library carries one of these codes so callers
// (the gateway retry loop, the HTTP facade, the CLI) can branch on kind rather
// than on message text.
enum class ErrorCode {
    invalid_argument,
    invalid_box,
    unknown_class,
    io_error,
    parse_error,
    no_json_found,
    schema_violation,
    non_list_errors,
    out_of_scale,
    config_error,
    alias_collision,
    not_found,
    duplicate_id,
    dangling_reference,
    illegal_transition,
    wrong_case,
    deadline_passed,
    duplicate_submission,
    cases_remaining,
    module_locked,
    empty_sample,
    length_mismatch,
    degenerate,
    retries_exhausted,
    auth_missing,
    auth_rejected,
    payload_too_large,
    unknown_fixture,
    queue_full,
    transport_error,
    undecodable_image,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace radgame
