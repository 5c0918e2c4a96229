#include "radgame/core/error.hpp"

namespace radgame {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::invalid_box: return "invalid_box";
        case ErrorCode::unknown_class: return "unknown_class";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::no_json_found: return "no_json_found";
        case ErrorCode::schema_violation: return "schema_violation";
        case ErrorCode::non_list_errors: return "non_list_errors";
        case ErrorCode::out_of_scale: return "out_of_scale";
        case ErrorCode::config_error: return "config_error";
        case ErrorCode::alias_collision: return "alias_collision";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::dangling_reference: return "dangling_reference";
        case ErrorCode::illegal_transition: return "illegal_transition";
        case ErrorCode::wrong_case: return "wrong_case";
        case ErrorCode::deadline_passed: return "deadline_passed";
        case ErrorCode::duplicate_submission: return "duplicate_submission";
        case ErrorCode::cases_remaining: return "cases_remaining";
        case ErrorCode::module_locked: return "module_locked";
        case ErrorCode::empty_sample: return "empty_sample";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::degenerate: return "degenerate";
        case ErrorCode::retries_exhausted: return "retries_exhausted";
        case ErrorCode::auth_missing: return "auth_missing";
        case ErrorCode::auth_rejected: return "auth_rejected";
        case ErrorCode::payload_too_large: return "payload_too_large";
        case ErrorCode::unknown_fixture: return "unknown_fixture";
        case ErrorCode::queue_full: return "queue_full";
        case ErrorCode::transport_error: return "transport_error";
        case ErrorCode::undecodable_image: return "undecodable_image";
    }
    return "unknown";
}

}  // namespace radgame
