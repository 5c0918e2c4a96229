#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstdio>

#include "radgame/api/config.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

PhaseSizes sizes_from(const json& j, PhaseSizes fallback) {
    fallback.pretest = j.value("pretest", fallback.pretest);
    fallback.learning = j.value("learning", fallback.learning);
    fallback.posttest = j.value("posttest", fallback.pretest);
    return fallback;
}

json sizes_json(const PhaseSizes& s) {
    return json{{"pretest", s.pretest}, {"learning", s.learning}, {"posttest", s.posttest}};
}

}  // namespace

AppConfig AppConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::config_error, "config must be a JSON object");
    AppConfig c;
    c.base_dir = base_dir;
    try {
        const json ds = j.value("datasets", json::object());
        c.localize_dataset = resolve(base_dir, ds.value("localize", std::string()));
        c.report_dataset = resolve(base_dir, ds.value("report", std::string()));
        c.image_root = resolve(base_dir, ds.value("image_root", std::string(".")));
        c.taxonomy = j.value("taxonomy", c.taxonomy);
        if (c.taxonomy != "default" && c.taxonomy != "interstitial") c.taxonomy = resolve(base_dir, c.taxonomy).string();

        const json gw = j.value("gateway", json::object());
        const std::string mode = gw.value("mode", std::string("stub"));
        if (mode == "stub") {
            c.gateway_mode = GatewayMode::stub;
        } else if (mode == "http") {
            c.gateway_mode = GatewayMode::http;
        } else {
            throw Error(ErrorCode::config_error, "gateway.mode must be 'stub' or 'http'");
        }
        c.stub_fixtures = resolve(base_dir, gw.value("fixtures", std::string()));
        if (gw.contains("endpoints")) {
            c.endpoints = gw["endpoints"].get<std::vector<ModelEndpointConfig>>();
        } else {
            c.endpoints = {default_endpoint(ModelRole::judge), default_endpoint(ModelRole::explainer)};
        }

        const json ps = j.value("phase_sizes", json::object());
        if (ps.contains("localize")) c.localize_sizes = sizes_from(ps["localize"], c.localize_sizes);
        if (ps.contains("report")) c.report_sizes = sizes_from(ps["report"], c.report_sizes);
        c.timer_minutes = j.value("timer_minutes", c.timer_minutes);
        c.iou_threshold = j.value("iou_threshold", c.iou_threshold);
        const json bind = j.value("bind", json::object());
        c.host = bind.value("host", c.host);
        c.port = bind.value("port", c.port);
        c.store_dir = resolve(base_dir, j.value("store_dir", std::string("study")));
        c.overlay_dir = resolve(base_dir, j.value("overlay_dir", std::string()));
        if (c.overlay_dir.empty()) c.overlay_dir = c.store_dir / "overlays";
        c.operator_token_env = j.value("operator_token_env", c.operator_token_env);
        c.curation_seed = j.value("curation_seed", c.curation_seed);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, "malformed config", e.what());
    }
    if (!(c.timer_minutes > 0)) throw Error(ErrorCode::config_error, "timer_minutes must be > 0");
    if (!(c.iou_threshold > 0 && c.iou_threshold < 1)) throw Error(ErrorCode::config_error, "iou_threshold must be in (0, 1)");
    if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::config_error, "bind.port out of range");
    for (Module m : {Module::localize, Module::report}) {
        if (c.sizes(m).pretest != c.sizes(m).posttest) {
            throw Error(ErrorCode::config_error,
                        "phase_sizes." + std::string(to_string(m)) + ": posttest must equal pretest");
        }
    }
    return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw Error(ErrorCode::config_error, "cannot read config " + path.string(), e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::config_error, "config " + path.string() + " is not valid JSON", e.what());
    }
    return from_json(j, std::filesystem::absolute(path).parent_path());
}

json AppConfig::to_json() const {
    json eps = json::array();
    for (const auto& e : endpoints) eps.push_back(e);
    return json{{"datasets",
                 {{"localize", localize_dataset.string()},
                  {"report", report_dataset.string()},
                  {"image_root", image_root.string()}}},
                {"taxonomy", taxonomy},
                {"gateway",
                 {{"mode", gateway_mode == GatewayMode::stub ? "stub" : "http"},
                  {"fixtures", stub_fixtures.string()},
                  {"endpoints", eps}}},
                {"phase_sizes", {{"localize", sizes_json(localize_sizes)}, {"report", sizes_json(report_sizes)}}},
                {"timer_minutes", timer_minutes},
                {"iou_threshold", iou_threshold},
                {"bind", {{"host", host}, {"port", port}}},
                {"store_dir", store_dir.string()},
                {"overlay_dir", overlay_dir.string()},
                {"operator_token_env", operator_token_env},
                {"curation_seed", curation_seed}};
}

TaxonomyConfig load_taxonomy(const AppConfig& cfg) {
    if (cfg.taxonomy == "default") return TaxonomyConfig::default_taxonomy();
    if (cfg.taxonomy == "interstitial") return TaxonomyConfig::interstitial_taxonomy();
    return TaxonomyConfig::load(cfg.taxonomy);
}

StudyDatasets load_datasets(const AppConfig& cfg) {
    StudyDatasets d;
    d.taxonomy = load_taxonomy(cfg);
    if (cfg.localize_dataset.empty() || !std::filesystem::exists(cfg.localize_dataset)) {
        throw Error(ErrorCode::config_error,
                    "localize dataset not found: '" + cfg.localize_dataset.string() +
                        "' (set datasets.localize to the output of 'radgame ingest localize')");
    }
    if (cfg.report_dataset.empty() || !std::filesystem::exists(cfg.report_dataset)) {
        throw Error(ErrorCode::config_error,
                    "report dataset not found: '" + cfg.report_dataset.string() +
                        "' (set datasets.report to the output of 'radgame ingest report')");
    }
    d.localize_cases = read_localize_cases(cfg.localize_dataset);
    d.report_cases = read_report_cases(cfg.report_dataset);
    return d;
}

std::unique_ptr<Gateway> make_gateway(const AppConfig& cfg, std::shared_ptr<Clock> clock) {
    std::shared_ptr<Transport> transport;
    if (cfg.gateway_mode == GatewayMode::stub) {
        auto registry = std::make_shared<StubRegistry>();
        if (!cfg.stub_fixtures.empty()) {
            *registry = StubRegistry::load(cfg.stub_fixtures);
        } else {
            registry->set_fallback(StubFallback::no_findings);
        }
        transport = std::make_shared<StubTransport>(registry);
    } else {
        transport = std::make_shared<HttpTransport>();
    }
    return std::make_unique<Gateway>(cfg.endpoints, transport, std::move(clock));
}

StudyPlan curate_plan(const AppConfig& cfg, const StudyDatasets& data) {
    StudyPlan plan;
    plan.localize = curate_study_sets(data.localize_cases, cfg.localize_sizes, cfg.curation_seed);
    plan.report = curate_study_sets(data.report_cases, cfg.report_sizes, cfg.curation_seed);
    plan.test_minutes = cfg.timer_minutes;
    plan.iou_threshold = cfg.iou_threshold;
    return plan;
}

FeedbackOptions feedback_options(const AppConfig& cfg) {
    FeedbackOptions o;
    o.image_root = cfg.image_root;
    o.overlay_root = cfg.overlay_dir;
    return o;
}

StudyRuntime open_study(const AppConfig& cfg, std::shared_ptr<StudyClock> clock, std::shared_ptr<Clock> gateway_clock) {
    StudyRuntime rt;
    rt.config = cfg;
    rt.gateway = make_gateway(cfg, std::move(gateway_clock));
    const auto events = read_event_log(cfg.events_path());
    auto sink = std::make_shared<JsonlEventLog>(cfg.events_path());
    EngineOptions options;
    options.feedback = feedback_options(cfg);
    rt.engine = std::make_unique<StudyEngine>(load_datasets(cfg), sink, rt.gateway.get(), std::move(clock), options);
    rt.engine->replay(events);
    return rt;
}

void save_state(const StudyRuntime& rt) {
    const auto path = rt.config.state_path();
    const auto tmp = path.string() + ".tmp";
    write_text_file(tmp, rt.engine->snapshot().dump(2) + "\n");
    std::filesystem::rename(tmp, path);
}

std::string mint_token() {
    unsigned char buf[32];
    if (RAND_bytes(buf, sizeof buf) != 1) throw Error(ErrorCode::io_error, "no entropy for token generation");
    std::string out;
    char hex[3];
    for (unsigned char b : buf) {
        std::snprintf(hex, sizeof hex, "%02x", b);
        out += hex;
    }
    return out;
}

std::string sha256_hex(std::string_view text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::io_error, "sha256 failed");
    }
    std::string out;
    char hex[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(hex, sizeof hex, "%02x", md[i]);
        out += hex;
    }
    return out;
}

}  // namespace radgame
