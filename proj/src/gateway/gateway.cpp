#include "radgame/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "radgame/core/error.hpp"
#include "radgame/core/random.hpp"

namespace radgame {

std::string_view to_string(ModelRole role) { return role == ModelRole::judge ? "judge" : "explainer"; }

ModelRole parse_model_role(std::string_view text) {
    if (text == "judge") return ModelRole::judge;
    if (text == "explainer") return ModelRole::explainer;
    throw Error(ErrorCode::invalid_argument, "unknown model role '" + std::string(text) + "'");
}

std::chrono::milliseconds BackoffPolicy::delay(int attempt) const {
    const double base = std::min(max_ms, initial_ms * std::pow(multiplier, std::max(0, attempt - 1)));
    Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(attempt));
    const double factor = 1.0 + jitter * (2.0 * rng.unit() - 1.0);
    return std::chrono::milliseconds(static_cast<long long>(std::llround(std::max(0.0, base * factor))));
}

void ModelEndpointConfig::validate() const {
    if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::config_error, "timeout_seconds must be > 0");
    if (max_retries < 0) throw Error(ErrorCode::config_error, "max_retries must be >= 0");
    if (max_in_flight < 1) throw Error(ErrorCode::config_error, "max_in_flight must be >= 1");
}

ModelEndpointConfig default_endpoint(ModelRole role) {
    ModelEndpointConfig c;
    c.role = role;
    if (role == ModelRole::judge) {
        c.model_id = "o3";
        c.auth_ref = "RADGAME_JUDGE_API_KEY";
        c.base_url = "https://api.openai.com/v1";
    } else {
        c.model_id = "medgemma-4b-it";
        c.auth_ref = "RADGAME_EXPLAINER_API_KEY";
        c.base_url = "http://127.0.0.1:8000/v1";
        c.timeout_seconds = 60.0;
    }
    return c;
}

void to_json(json& j, const ModelEndpointConfig& c) {
    j = json{{"role", to_string(c.role)},
             {"model_id", c.model_id},
             {"base_url", c.base_url},
             {"auth_ref", c.auth_ref},
             {"timeout_seconds", c.timeout_seconds},
             {"max_retries", c.max_retries},
             {"max_in_flight", c.max_in_flight},
             {"max_payload_bytes", c.max_payload_bytes},
             {"temperature", c.temperature},
             {"backoff",
              {{"initial_ms", c.backoff.initial_ms},
               {"multiplier", c.backoff.multiplier},
               {"max_ms", c.backoff.max_ms},
               {"jitter", c.backoff.jitter},
               {"seed", c.backoff.seed}}}};
    j["max_queued"] = c.max_queued ? json(*c.max_queued) : json(nullptr);
}

void from_json(const json& j, ModelEndpointConfig& c) {
    c = default_endpoint(parse_model_role(require_field<std::string>(j, "role")));
    c.model_id = j.value("model_id", c.model_id);
    c.base_url = j.value("base_url", c.base_url);
    c.auth_ref = j.value("auth_ref", c.auth_ref);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.max_payload_bytes = j.value("max_payload_bytes", c.max_payload_bytes);
    c.temperature = j.value("temperature", c.temperature);
    if (j.contains("max_queued") && !j["max_queued"].is_null()) c.max_queued = j["max_queued"].get<std::size_t>();
    if (j.contains("backoff")) {
        const auto& b = j["backoff"];
        c.backoff.initial_ms = b.value("initial_ms", c.backoff.initial_ms);
        c.backoff.multiplier = b.value("multiplier", c.backoff.multiplier);
        c.backoff.max_ms = b.value("max_ms", c.backoff.max_ms);
        c.backoff.jitter = b.value("jitter", c.backoff.jitter);
        c.backoff.seed = b.value("seed", c.backoff.seed);
    }
    c.validate();
}

std::size_t GatewayRequest::payload_bytes() const {
    std::size_t n = prompt.size();
    for (const auto& img : images) n += img.base64.size() + img.media_type.size();
    return n;
}

bool is_transient(const TransportResult& r) {
    switch (r.kind) {
        case TransportResult::Kind::ok:
        case TransportResult::Kind::fatal: return false;
        case TransportResult::Kind::timeout:
        case TransportResult::Kind::network: return true;
        case TransportResult::Kind::http_status: return r.http_status == 429 || r.http_status >= 500;
    }
    return false;
}

void Clock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

FairLimiter::FairLimiter(int slots, std::optional<std::size_t> max_queued)
    : slots_(slots), max_queued_(max_queued) {}

FairLimiter::Permit FairLimiter::acquire() {
    std::unique_lock lock(mutex_);
    if (in_flight_ < slots_ && waiting_.empty()) {
        peak_ = std::max(peak_, ++in_flight_);
        return Permit(this);
    }
    if (max_queued_ && waiting_.size() >= *max_queued_) {
        throw Error(ErrorCode::queue_full, "model gateway queue is full");
    }
    const auto ticket = next_ticket_++;
    waiting_.push_back(ticket);
    cv_.wait(lock, [&] { return waiting_.front() == ticket && in_flight_ < slots_; });
    waiting_.pop_front();
    peak_ = std::max(peak_, ++in_flight_);
    lock.unlock();
    cv_.notify_all();
    return Permit(this);
}

void FairLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_all();
}

int FairLimiter::in_flight() const {
    std::lock_guard lock(mutex_);
    return in_flight_;
}

int FairLimiter::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

Gateway::Gateway(std::vector<ModelEndpointConfig> endpoints, std::shared_ptr<Transport> transport,
                 std::shared_ptr<Clock> clock)
    : transport_(std::move(transport)), clock_(std::move(clock)) {
    if (!transport_) throw Error(ErrorCode::config_error, "gateway needs a transport");
    for (auto& e : endpoints) {
        e.validate();
        auto limiter = std::make_unique<FairLimiter>(e.max_in_flight, e.max_queued);
        const auto role = e.role;
        if (!slots_.emplace(role, Slot{std::move(e), std::move(limiter)}).second) {
            throw Error(ErrorCode::config_error, "duplicate endpoint for role " + std::string(to_string(role)));
        }
    }
}

bool Gateway::has_role(ModelRole role) const { return slots_.count(role) != 0; }

const Gateway::Slot& Gateway::slot(ModelRole role) const {
    auto it = slots_.find(role);
    if (it == slots_.end()) {
        throw Error(ErrorCode::invalid_argument, "no endpoint configured for role " + std::string(to_string(role)));
    }
    return it->second;
}

const ModelEndpointConfig& Gateway::endpoint(ModelRole role) const { return slot(role).config; }

const FairLimiter& Gateway::limiter(ModelRole role) const { return *slot(role).limiter; }

GatewayResponse Gateway::complete(const GatewayRequest& req) {
    const auto& s = slot(req.role);
    const auto& cfg = s.config;
    if (req.role == ModelRole::judge && !req.images.empty()) {
        throw Error(ErrorCode::invalid_argument, "judge requests cannot carry images");
    }
    if (req.payload_bytes() > cfg.max_payload_bytes) {
        throw Error(ErrorCode::payload_too_large, "request of " + std::to_string(req.payload_bytes()) +
                                                      " bytes exceeds the " + std::to_string(cfg.max_payload_bytes) +
                                                      "-byte limit");
    }
    std::string api_key;
    if (transport_->requires_auth() && !cfg.auth_ref.empty()) {
        const char* value = std::getenv(cfg.auth_ref.c_str());
        if (!value || !*value) {
            throw Error(ErrorCode::auth_missing, "environment variable " + cfg.auth_ref + " is not set", cfg.auth_ref);
        }
        api_key = value;
    }

    auto permit = s.limiter->acquire();
    const auto started = clock_->now();
    const int max_attempts = cfg.max_retries + 1;
    std::string last_failure;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        TransportResult r = transport_->send(cfg, req, api_key);
        if (r.kind == TransportResult::Kind::ok) {
            const auto elapsed = std::chrono::duration<double, std::milli>(clock_->now() - started).count();
            return GatewayResponse{std::move(r.text), elapsed, attempt, cfg.model_id};
        }
        if (r.kind == TransportResult::Kind::fatal) throw Error(r.fatal_code, r.text);
        if (r.kind == TransportResult::Kind::http_status) {
            if (r.http_status == 401 || r.http_status == 403) {
                throw Error(ErrorCode::auth_rejected, "endpoint rejected credentials (HTTP " +
                                                          std::to_string(r.http_status) + ")");
            }
            if (r.http_status == 413) throw Error(ErrorCode::payload_too_large, "endpoint returned HTTP 413");
        }
        if (!is_transient(r)) {
            throw Error(ErrorCode::transport_error, "HTTP " + std::to_string(r.http_status) + ": " + r.text);
        }
        last_failure = r.kind == TransportResult::Kind::http_status ? "HTTP " + std::to_string(r.http_status)
                                                                    : r.text;
        if (attempt < max_attempts) clock_->sleep_for(cfg.backoff.delay(attempt));
    }
    throw Error(ErrorCode::retries_exhausted,
                "gave up after " + std::to_string(max_attempts) + " attempts; last failure: " + last_failure);
}

}  // namespace radgame
