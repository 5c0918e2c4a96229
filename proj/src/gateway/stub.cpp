#include "radgame/gateway/stub.hpp"

#include "radgame/core/error.hpp"

namespace radgame {

StubRegistry::StubRegistry(std::map<std::string, std::string> responses, StubFallback fallback)
    : responses_(std::move(responses)), fallback_(fallback) {}

StubRegistry StubRegistry::from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "fixture file must hold a JSON object");
    StubRegistry reg;
    const json* responses = &j;
    if (j.contains("responses")) {
        responses = &j["responses"];
        const auto fb = j.value("fallback", std::string("error"));
        if (fb == "error") {
            reg.fallback_ = StubFallback::error;
        } else if (fb == "no_findings") {
            reg.fallback_ = StubFallback::no_findings;
        } else {
            throw Error(ErrorCode::parse_error, "fixture fallback must be error or no_findings");
        }
    }
    if (!responses->is_object()) throw Error(ErrorCode::parse_error, "fixture responses must be an object");
    for (const auto& [key, value] : responses->items()) {
        if (key == "fallback") continue;
        if (value.is_string()) {
            reg.responses_[key] = value.get<std::string>();
        } else if (value.is_object() || value.is_array()) {
            // Structured fixtures are stored as the JSON text a model would return.
            reg.responses_[key] = value.dump(2);
        } else {
            throw Error(ErrorCode::parse_error, "fixture '" + key + "' must be text or JSON");
        }
    }
    return reg;
}

StubRegistry StubRegistry::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return from_json(j);
}

json StubRegistry::to_json() const {
    return json{{"fallback", fallback_ == StubFallback::error ? "error" : "no_findings"}, {"responses", responses_}};
}

std::string StubRegistry::no_findings_text(const GatewayRequest& req) {
    if (req.purpose == "style") {
        return json{{"systematic_evaluation_score", 1},
                    {"organization_language_score", 1},
                    {"systematic_evaluation_recommendation", ""},
                    {"organization_language_recommendation", ""}}
            .dump(2);
    }
    if (req.role == ModelRole::explainer) return "No model explanation is available for this finding.";
    return json{{"Explanation", "No clinically significant findings to compare."},
                {"ClinicallySignificantErrors",
                 {{"a", json::array()}, {"b", json::array()}, {"c", json::array()}, {"d", json::array()}}},
                {"MatchedFindings", json::array()}}
        .dump(2);
}

std::string StubRegistry::lookup(const GatewayRequest& req) const {
    const std::string keys[] = {request_digest(req), req.purpose + ":" + req.subject, req.subject};
    for (const auto& key : keys) {
        if (key.empty() || key == ":") continue;
        auto it = responses_.find(key);
        if (it != responses_.end()) return it->second;
    }
    if (fallback_ == StubFallback::no_findings) return no_findings_text(req);
    throw Error(ErrorCode::unknown_fixture,
                "no fixture for " + req.purpose + ":" + req.subject + " (digest " + keys[0] + ")", keys[0]);
}

TransportResult StubTransport::send(const ModelEndpointConfig&, const GatewayRequest& req, const std::string&) {
    try {
        return TransportResult::success(registry_->lookup(req));
    } catch (const Error& e) {
        TransportResult r;
        r.kind = TransportResult::Kind::fatal;
        r.fatal_code = e.code();
        r.text = e.what();
        return r;
    }
}

}  // namespace radgame
