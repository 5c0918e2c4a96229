#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "radgame/core/serialization.hpp"

namespace radgame {

enum class ModelRole { judge, explainer };

std::string_view to_string(ModelRole role);
ModelRole parse_model_role(std::string_view text);

struct BackoffPolicy {
    double initial_ms = 500.0;
    double multiplier = 2.0;
    double max_ms = 30000.0;
    double jitter = 0.2;  // fraction; delay is scaled by a factor in [1-jitter, 1+jitter]
    std::uint64_t seed = 0;

    // Deterministic in (seed, attempt). attempt is the 1-based number of the
    // attempt that just failed.
    std::chrono::milliseconds delay(int attempt) const;
};

struct ModelEndpointConfig {
    ModelRole role = ModelRole::judge;
    std::string model_id;
    std::string base_url;
    std::string auth_ref;  // environment variable holding the API key; empty = no auth
    double timeout_seconds = 120.0;
    int max_retries = 2;
    int max_in_flight = 4;
    // Callers wait in FIFO order for a slot. nullopt waits without bound; 0
    // rejects as soon as every slot is busy.
    std::optional<std::size_t> max_queued;
    std::size_t max_payload_bytes = 20u * 1024u * 1024u;
    double temperature = 0.0;
    BackoffPolicy backoff;

    // Throws Error(config_error) when an invariant fails.
    void validate() const;
};

ModelEndpointConfig default_endpoint(ModelRole role);

void to_json(json& j, const ModelEndpointConfig& c);
void from_json(const json& j, ModelEndpointConfig& c);

struct ImagePayload {
    std::string media_type;  // e.g. image/png
    std::string base64;
};

struct GatewayRequest {
    ModelRole role = ModelRole::judge;
    std::string prompt;
    std::vector<ImagePayload> images;  // explainer only
    // Routing hints for stub fixtures; never sent over the wire.
    std::string purpose;  // crimson, style, explain_draw, explain_select
    std::string subject;  // case_id or class_id

    std::size_t payload_bytes() const;
};

struct GatewayResponse {
    std::string text;
    double latency_ms = 0.0;
    int attempt_count = 0;
    std::string model_id;
};

// SHA-256 over role, prompt and image payloads, lowercase hex.
std::string request_digest(const GatewayRequest& req);

std::string base64_encode(std::string_view bytes);

struct TransportResult {
    enum class Kind { ok, timeout, http_status, network, fatal };
    Kind kind = Kind::ok;
    int http_status = 0;
    std::string text;   // model output when ok, diagnostic otherwise
    ErrorCode fatal_code = ErrorCode::transport_error;

    static TransportResult success(std::string text) { return {Kind::ok, 200, std::move(text)}; }
};

bool is_transient(const TransportResult& r);

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult send(const ModelEndpointConfig& endpoint, const GatewayRequest& req,
                                 const std::string& api_key) = 0;
    // Stub transports need no credentials.
    virtual bool requires_auth() const { return true; }
};

// Wall clock by default; tests substitute a fake that records sleeps.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() const { return std::chrono::steady_clock::now(); }
    virtual void sleep_for(std::chrono::milliseconds d);
};

// FIFO admission: waiters acquire slots strictly in arrival order.
class FairLimiter {
public:
    FairLimiter(int slots, std::optional<std::size_t> max_queued);

    class Permit {
    public:
        explicit Permit(FairLimiter* owner) : owner_(owner) {}
        Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;
        Permit& operator=(Permit&&) = delete;
        ~Permit() {
            if (owner_) owner_->release();
        }

    private:
        FairLimiter* owner_;
    };

    Permit acquire();  // throws Error(queue_full)
    int in_flight() const;
    int peak_in_flight() const;

private:
    void release();

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
    std::optional<std::size_t> max_queued_;
    int in_flight_ = 0;
    int peak_ = 0;
    std::uint64_t next_ticket_ = 0;
    std::deque<std::uint64_t> waiting_;
};

class Gateway {
public:
    Gateway(std::vector<ModelEndpointConfig> endpoints, std::shared_ptr<Transport> transport,
            std::shared_ptr<Clock> clock = std::make_shared<Clock>());

    /// Sends the request to the endpoint configured for its role. Transient
    /// failures (timeout, 5xx, 429, connection errors) are retried after the
    /// endpoint's backoff delay, up to max_retries extra attempts.
    ///
    /// Errors: auth_missing (key variable unset), auth_rejected (401/403),
    /// payload_too_large (local limit or 413), retries_exhausted,
    /// queue_full, unknown_fixture (stub), transport_error (other 4xx),
    /// invalid_argument (no endpoint for role, images on a judge request).
    GatewayResponse complete(const GatewayRequest& req);

    bool has_role(ModelRole role) const;
    const ModelEndpointConfig& endpoint(ModelRole role) const;
    const FairLimiter& limiter(ModelRole role) const;

private:
    struct Slot {
        ModelEndpointConfig config;
        std::unique_ptr<FairLimiter> limiter;
    };
    const Slot& slot(ModelRole role) const;

    std::map<ModelRole, Slot> slots_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
};

}  // namespace radgame
