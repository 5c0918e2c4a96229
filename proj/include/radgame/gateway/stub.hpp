#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "radgame/gateway/gateway.hpp"

namespace radgame {

enum class StubFallback { error, no_findings };

// Offline fixtures. Keys are tried in this order: the request digest,
// "<purpose>:<subject>", then "<subject>".
//
// File format: {"fallback": "error"|"no_findings", "responses": {key: text}};
// a bare {key: text} object is also accepted.
class StubRegistry {
public:
    StubRegistry() = default;
    StubRegistry(std::map<std::string, std::string> responses, StubFallback fallback);

    static StubRegistry from_json(const json& j);
    static StubRegistry load(const std::filesystem::path& path);  // Error(parse_error) when malformed

    // Throws Error(unknown_fixture) when nothing matches and fallback is error.
    std::string lookup(const GatewayRequest& req) const;

    void add(std::string key, std::string text) { responses_[std::move(key)] = std::move(text); }
    void set_fallback(StubFallback f) { fallback_ = f; }
    std::size_t size() const { return responses_.size(); }
    json to_json() const;

    static std::string no_findings_text(const GatewayRequest& req);

private:
    std::map<std::string, std::string> responses_;
    StubFallback fallback_ = StubFallback::error;
};

// Transport answering from a StubRegistry; never touches the network.
class StubTransport : public Transport {
public:
    explicit StubTransport(std::shared_ptr<const StubRegistry> registry) : registry_(std::move(registry)) {}

    TransportResult send(const ModelEndpointConfig& endpoint, const GatewayRequest& req,
                         const std::string& api_key) override;
    bool requires_auth() const override { return false; }

private:
    std::shared_ptr<const StubRegistry> registry_;
};

// Chat-completions over HTTP(S): POST {base_url}/chat/completions with
// {"model", "temperature", "messages":[{"role":"user","content":...}]}.
// Images travel as data: URLs in image_url content parts.
class HttpTransport : public Transport {
public:
    TransportResult send(const ModelEndpointConfig& endpoint, const GatewayRequest& req,
                         const std::string& api_key) override;

    // Exposed for tests: the exact body put on the wire.
    static json build_body(const ModelEndpointConfig& endpoint, const GatewayRequest& req);
};

}  // namespace radgame
