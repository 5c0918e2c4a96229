#include <httplib.h>

#include "radgame/core/error.hpp"
#include "radgame/gateway/stub.hpp"

namespace radgame {

namespace {

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::config_error, "base_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    p.scheme_host_port = url.substr(0, path_start);
    p.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
    return p;
}

}  // namespace

json HttpTransport::build_body(const ModelEndpointConfig& endpoint, const GatewayRequest& req) {
    json content;
    if (req.images.empty()) {
        content = req.prompt;
    } else {
        content = json::array();
        content.push_back({{"type", "text"}, {"text", req.prompt}});
        for (const auto& img : req.images) {
            content.push_back({{"type", "image_url"},
                               {"image_url", {{"url", "data:" + img.media_type + ";base64," + img.base64}}}});
        }
    }
    return json{{"model", endpoint.model_id},
                {"temperature", endpoint.temperature},
                {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

TransportResult HttpTransport::send(const ModelEndpointConfig& endpoint, const GatewayRequest& req,
                                    const std::string& api_key) {
    const auto url = split_url(endpoint.base_url);
    httplib::Client client(url.scheme_host_port);
    const auto secs = static_cast<time_t>(endpoint.timeout_seconds);
    const auto usecs = static_cast<time_t>((endpoint.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const auto body = build_body(endpoint, req).dump();
    auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");

    TransportResult out;
    if (!res) {
        const auto err = res.error();
        out.kind = (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
                       ? TransportResult::Kind::timeout
                       : TransportResult::Kind::network;
        out.text = httplib::to_string(err);
        return out;
    }
    if (res->status != 200) {
        out.kind = TransportResult::Kind::http_status;
        out.http_status = res->status;
        out.text = res->body.substr(0, 512);
        return out;
    }
    try {
        const auto j = json::parse(res->body);
        return TransportResult::success(j.at("choices").at(0).at("message").at("content").get<std::string>());
    } catch (const json::exception& e) {
        // A garbled 200 is treated like a dropped connection and retried.
        out.kind = TransportResult::Kind::network;
        out.text = std::string("malformed completion body: ") + e.what();
        return out;
    }
}

}  // namespace radgame
