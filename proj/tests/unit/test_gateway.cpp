#include <doctest.h>

#include <atomic>
#include <cmath>
#include <functional>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "radgame/core/error.hpp"
#include "radgame/gateway/gateway.hpp"
#include "radgame/gateway/stub.hpp"
#include "test_support.hpp"

using namespace radgame;

namespace {

class FakeClock : public Clock {
public:
    void sleep_for(std::chrono::milliseconds d) override {
        std::lock_guard<std::mutex> lock(mutex);
        sleeps.push_back(d);
    }
    std::mutex mutex;
    std::vector<std::chrono::milliseconds> sleeps;
};

// Scripted chat-completions server: answers with the queued statuses in order,
// then 200 with `content`.
class FakeModelServer {
public:
    explicit FakeModelServer(std::vector<int> statuses, std::string content = "ok")
        : statuses_(std::move(statuses)), content_(std::move(content)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard<std::mutex> lock(mutex_);
            bodies.push_back(req.body);
            auth_headers.push_back(req.get_header_value("Authorization"));
            const std::size_t k = hits++;
            if (k < statuses_.size()) {
                res.status = statuses_[k];
                res.set_content("scripted failure", "text/plain");
                return;
            }
            json body{{"choices", {{{"message", {{"role", "assistant"}, {"content", content_}}}}}}};
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeModelServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    std::size_t hits = 0;
    std::vector<std::string> bodies;
    std::vector<std::string> auth_headers;

private:
    httplib::Server server_;
    std::vector<int> statuses_;
    std::string content_;
    std::mutex mutex_;
    int port_ = 0;
    std::thread thread_;
};

ModelEndpointConfig http_endpoint(const FakeModelServer& server, int retries = 2) {
    auto cfg = default_endpoint(ModelRole::judge);
    cfg.model_id = "judge-test";
    cfg.base_url = server.base_url();
    cfg.auth_ref = "";
    cfg.max_retries = retries;
    cfg.timeout_seconds = 5.0;
    return cfg;
}

GatewayRequest judge_request(std::string prompt = "compare these") {
    GatewayRequest r;
    r.role = ModelRole::judge;
    r.prompt = std::move(prompt);
    r.purpose = "crimson";
    r.subject = "case1";
    return r;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("backoff delays are deterministic and bounded") {
    BackoffPolicy p;
    p.initial_ms = 100;
    p.multiplier = 2;
    p.max_ms = 1000;
    p.jitter = 0.2;
    p.seed = 42;
    for (int a = 1; a <= 8; ++a) {
        CHECK(p.delay(a) == p.delay(a));
        const double base = std::min(1000.0, 100.0 * std::pow(2.0, a - 1));
        CHECK(p.delay(a).count() >= std::floor(base * 0.8));
        CHECK(p.delay(a).count() <= std::ceil(base * 1.2));
    }
    BackoffPolicy flat = p;
    flat.jitter = 0;
    CHECK(flat.delay(1).count() == 100);
    CHECK(flat.delay(3).count() == 400);
    CHECK(flat.delay(9).count() == 1000);
}

TEST_CASE("request digest depends on role, prompt and images") {
    auto a = judge_request();
    auto b = judge_request();
    CHECK(request_digest(a) == request_digest(b));
    CHECK(request_digest(a).size() == 64);
    b.subject = "other";
    CHECK(request_digest(a) == request_digest(b));
    b.prompt += " ";
    CHECK(request_digest(a) != request_digest(b));
    auto e = a;
    e.role = ModelRole::explainer;
    CHECK(request_digest(a) != request_digest(e));
    auto img = e;
    img.images.push_back({"image/png", base64_encode("xyz")});
    CHECK(request_digest(img) != request_digest(e));
    CHECK(base64_encode("Man") == "TWFu");
    CHECK(base64_encode("Ma") == "TWE=");
    CHECK(base64_encode("") == "");
}

TEST_CASE("stub lookup tries digest, purpose:subject, then subject") {
    const auto req = judge_request();
    StubRegistry r({{"case1", "by subject"}}, StubFallback::error);
    CHECK(r.lookup(req) == "by subject");
    r.add("crimson:case1", "by purpose");
    CHECK(r.lookup(req) == "by purpose");
    r.add(request_digest(req), "by digest");
    CHECK(r.lookup(req) == "by digest");

    StubRegistry empty;
    CHECK(code_of([&] { empty.lookup(req); }) == ErrorCode::unknown_fixture);
    empty.set_fallback(StubFallback::no_findings);
    const auto j = json::parse(empty.lookup(req));
    CHECK(j.contains("ClinicallySignificantErrors"));

    const auto reloaded = StubRegistry::from_json(r.to_json());
    CHECK(reloaded.lookup(req) == "by digest");
    const auto bare = StubRegistry::from_json(json{{"case1", "x"}});
    CHECK(bare.lookup(req) == "x");
}

TEST_CASE("gateway over the stub transport never needs credentials") {
    auto reg = std::make_shared<StubRegistry>(std::map<std::string, std::string>{{"case1", "hello"}},
                                              StubFallback::error);
    auto cfg = default_endpoint(ModelRole::judge);
    cfg.auth_ref = "RADGAME_TEST_UNSET_KEY";
    ::unsetenv("RADGAME_TEST_UNSET_KEY");
    Gateway g({cfg}, std::make_shared<StubTransport>(reg));
    const auto res = g.complete(judge_request());
    CHECK(res.text == "hello");
    CHECK(res.attempt_count == 1);
    CHECK(g.has_role(ModelRole::judge));
    CHECK_FALSE(g.has_role(ModelRole::explainer));
    auto ex = judge_request();
    ex.role = ModelRole::explainer;
    CHECK(code_of([&] { g.complete(ex); }) == ErrorCode::invalid_argument);
    auto with_image = judge_request();
    with_image.images.push_back({"image/png", "AAAA"});
    CHECK(code_of([&] { g.complete(with_image); }) == ErrorCode::invalid_argument);
    auto unknown = judge_request();
    unknown.subject = "nope";
    CHECK(code_of([&] { g.complete(unknown); }) == ErrorCode::unknown_fixture);
}

TEST_CASE("http transport retries transient statuses with backoff") {
    FakeModelServer server({500, 429}, "judged");
    auto clock = std::make_shared<FakeClock>();
    auto cfg = http_endpoint(server, 2);
    cfg.backoff.jitter = 0;
    cfg.backoff.initial_ms = 10;
    Gateway g({cfg}, std::make_shared<HttpTransport>(), clock);
    const auto res = g.complete(judge_request());
    CHECK(res.text == "judged");
    CHECK(res.attempt_count == 3);
    CHECK(res.model_id == "judge-test");
    CHECK(server.hits == 3);
    REQUIRE(clock->sleeps.size() == 2);
    CHECK(clock->sleeps[0].count() == 10);
    CHECK(clock->sleeps[1].count() == 20);

    const auto body = json::parse(server.bodies.at(0));
    CHECK(body["model"] == "judge-test");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"][0]["role"] == "user");
}

TEST_CASE("http transport gives up after max retries") {
    FakeModelServer server({503, 503, 503, 503});
    Gateway g({http_endpoint(server, 2)}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
    CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::retries_exhausted);
    CHECK(server.hits == 3);
}

TEST_CASE("auth and payload failures are not retried") {
    {
        FakeModelServer server({401});
        Gateway g({http_endpoint(server)}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
        CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::auth_rejected);
        CHECK(server.hits == 1);
    }
    {
        FakeModelServer server({413});
        Gateway g({http_endpoint(server)}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
        CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::payload_too_large);
        CHECK(server.hits == 1);
    }
    {
        FakeModelServer server({400});
        Gateway g({http_endpoint(server)}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
        CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::transport_error);
    }
    {
        FakeModelServer server({});
        auto cfg = http_endpoint(server);
        cfg.max_payload_bytes = 4;
        Gateway g({cfg}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
        CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::payload_too_large);
        CHECK(server.hits == 0);
    }
}

TEST_CASE("api key comes from the named environment variable") {
    FakeModelServer server({});
    auto cfg = http_endpoint(server);
    cfg.auth_ref = "RADGAME_TEST_JUDGE_KEY";
    ::unsetenv("RADGAME_TEST_JUDGE_KEY");
    Gateway g({cfg}, std::make_shared<HttpTransport>(), std::make_shared<FakeClock>());
    CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::auth_missing);
    ::setenv("RADGAME_TEST_JUDGE_KEY", "sekrit", 1);
    CHECK(g.complete(judge_request()).text == "ok");
    CHECK(server.auth_headers.back() == "Bearer sekrit");
    ::unsetenv("RADGAME_TEST_JUDGE_KEY");
}

TEST_CASE("explainer images travel as data urls") {
    GatewayRequest r;
    r.role = ModelRole::explainer;
    r.prompt = "explain";
    r.images.push_back({"image/png", "QUJD"});
    auto cfg = default_endpoint(ModelRole::explainer);
    const auto body = HttpTransport::build_body(cfg, r);
    const auto& content = body["messages"][0]["content"];
    REQUIRE(content.is_array());
    bool found = false;
    for (const auto& part : content) {
        if (part["type"] == "image_url") found = part["image_url"]["url"] == "data:image/png;base64,QUJD";
    }
    CHECK(found);
}

TEST_CASE("unreachable endpoint is retried then exhausted") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    auto cfg = default_endpoint(ModelRole::judge);
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.auth_ref = "";
    cfg.max_retries = 1;
    cfg.timeout_seconds = 1.0;
    auto clock = std::make_shared<FakeClock>();
    Gateway g({cfg}, std::make_shared<HttpTransport>(), clock);
    CHECK(code_of([&] { g.complete(judge_request()); }) == ErrorCode::retries_exhausted);
    CHECK(clock->sleeps.size() == 1);
}

TEST_CASE("fair limiter caps concurrency and queue length") {
    FairLimiter limiter(2, std::nullopt);
    std::atomic<int> done{0};
    std::vector<std::thread> threads;
    for (int k = 0; k < 8; ++k) {
        threads.emplace_back([&] {
            auto permit = limiter.acquire();
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            ++done;
        });
    }
    for (auto& t : threads) t.join();
    CHECK(done == 8);
    CHECK(limiter.peak_in_flight() <= 2);
    CHECK(limiter.in_flight() == 0);

    FairLimiter strict(1, 0);
    auto held = strict.acquire();
    CHECK(code_of([&] { strict.acquire(); }) == ErrorCode::queue_full);
}

TEST_CASE("fair limiter admits waiters in arrival order") {
    FairLimiter limiter(1, std::nullopt);
    auto first = std::make_unique<FairLimiter::Permit>(limiter.acquire());
    std::mutex m;
    std::vector<int> order;
    std::vector<std::thread> threads;
    for (int k = 0; k < 4; ++k) {
        threads.emplace_back([&, k] {
            auto p = limiter.acquire();
            std::lock_guard<std::mutex> lock(m);
            order.push_back(k);
        });
        // let each waiter enqueue before the next arrives
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
    }
    first.reset();
    for (auto& t : threads) t.join();
    CHECK(order == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("endpoint config json and validation") {
    auto cfg = default_endpoint(ModelRole::explainer);
    cfg.max_queued = 3;
    const json j = cfg;
    const auto back = j.get<ModelEndpointConfig>();
    CHECK(back.role == ModelRole::explainer);
    CHECK(back.max_queued == std::optional<std::size_t>(3));
    CHECK(back.model_id == cfg.model_id);
    cfg.max_in_flight = 0;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::config_error);
    CHECK(parse_model_role("judge") == ModelRole::judge);
}
