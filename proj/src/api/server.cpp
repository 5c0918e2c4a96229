#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <thread>

#include "radgame/api/config.hpp"
#include "radgame/api/server.hpp"

namespace radgame {

std::string_view radgame_version() { return RADGAME_VERSION; }

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_box:
        case ErrorCode::unknown_class:
        case ErrorCode::schema_violation:
        case ErrorCode::out_of_scale:
            return 422;
        case ErrorCode::invalid_argument:
        case ErrorCode::parse_error:
        case ErrorCode::no_json_found:
        case ErrorCode::non_list_errors:
        case ErrorCode::empty_sample:
        case ErrorCode::length_mismatch:
        case ErrorCode::degenerate:
            return 400;
        case ErrorCode::auth_missing: return 401;
        case ErrorCode::auth_rejected: return 403;
        case ErrorCode::not_found:
        case ErrorCode::dangling_reference:
            return 404;
        case ErrorCode::duplicate_id:
        case ErrorCode::illegal_transition:
        case ErrorCode::wrong_case:
        case ErrorCode::duplicate_submission:
        case ErrorCode::cases_remaining:
        case ErrorCode::module_locked:
        case ErrorCode::alias_collision:
            return 409;
        case ErrorCode::deadline_passed: return 410;
        case ErrorCode::payload_too_large: return 413;
        case ErrorCode::queue_full:
        case ErrorCode::retries_exhausted:
        case ErrorCode::transport_error:
        case ErrorCode::unknown_fixture:
            return 503;
        case ErrorCode::io_error:
        case ErrorCode::config_error:
        case ErrorCode::undecodable_image:
            return 500;
    }
    return 500;
}

json error_body(const Error& e) {
    return json{{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}};
}

namespace {

[[noreturn]] void field_error(ErrorCode code, const std::string& path, const std::string& message) {
    throw Error(code, path + ": " + message, path);
}

double number_at(const json& obj, const char* key, const std::string& path) {
    const std::string p = path + "." + key;
    if (!obj.contains(key)) field_error(ErrorCode::schema_violation, p, "required");
    if (!obj[key].is_number()) field_error(ErrorCode::schema_violation, p, "must be a number");
    return obj[key].get<double>();
}

}  // namespace

LocalizeSubmission parse_localize_submission(const json& body, const TaxonomyConfig& taxonomy) {
    if (!body.is_object()) field_error(ErrorCode::schema_violation, "$", "body must be a JSON object");
    LocalizeSubmission s;
    if (!body.contains("case_id") || !body["case_id"].is_string()) {
        field_error(ErrorCode::schema_violation, "case_id", "required string");
    }
    s.case_id = body["case_id"].get<std::string>();
    if (body.contains("elapsed_seconds")) {
        if (!body["elapsed_seconds"].is_number()) field_error(ErrorCode::schema_violation, "elapsed_seconds", "must be a number");
        s.elapsed_seconds = body["elapsed_seconds"].get<double>();
    }
    if (!body.contains("entries")) return s;
    if (!body["entries"].is_array()) field_error(ErrorCode::schema_violation, "entries", "must be an array");
    const auto& entries = body["entries"];
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string ep = "entries[" + std::to_string(i) + "]";
        const auto& e = entries[i];
        if (!e.is_object()) field_error(ErrorCode::schema_violation, ep, "must be an object");
        SubmissionEntry entry;
        if (!e.contains("class_id") || !e["class_id"].is_string()) {
            field_error(ErrorCode::schema_violation, ep + ".class_id", "required string");
        }
        entry.class_id = e["class_id"].get<std::string>();
        if (!taxonomy.find(entry.class_id)) {
            field_error(ErrorCode::unknown_class, ep + ".class_id", "unknown class '" + entry.class_id + "'");
        }
        if (e.contains("boxes")) {
            if (!e["boxes"].is_array()) field_error(ErrorCode::schema_violation, ep + ".boxes", "must be an array");
            for (std::size_t k = 0; k < e["boxes"].size(); ++k) {
                const std::string bp = ep + ".boxes[" + std::to_string(k) + "]";
                const auto& b = e["boxes"][k];
                if (!b.is_object()) field_error(ErrorCode::schema_violation, bp, "must be an object");
                BoundingBox box{number_at(b, "x_min", bp), number_at(b, "y_min", bp), number_at(b, "x_max", bp),
                                number_at(b, "y_max", bp)};
                if (auto why = validate_box(box)) field_error(ErrorCode::invalid_box, bp, *why);
                entry.boxes.push_back(box);
            }
        }
        entry.asserted = !entry.boxes.empty();
        if (e.contains("asserted")) {
            if (!e["asserted"].is_boolean()) field_error(ErrorCode::schema_violation, ep + ".asserted", "must be a boolean");
            entry.asserted = e["asserted"].get<bool>();
        }
        s.entries.push_back(std::move(entry));
    }
    if (auto why = validate_submission(s, taxonomy)) {
        const auto colon = why->find(':');
        throw Error(ErrorCode::schema_violation, *why, colon == std::string::npos ? *why : why->substr(0, colon));
    }
    return s;
}

const std::vector<RouteDoc>& route_table() {
    static const std::vector<RouteDoc> routes = {
        {"GET", "/healthz", "Liveness and build version.", "none", nullptr, {{"200", "status and version"}}},
        {"POST", "/participants", "Register a participant and mint their bearer token.", "operator",
         {{"participant_id", "p01"}},
         {{"201", "participant_id and token (shown once)"}, {"409", "duplicate participant"}}},
        {"POST", "/study/assign", "Assign every unassigned participant to crossover groups.", "operator",
         {{"seed", 7}}, {{"200", "assignments"}, {"400", "no unassigned participants"}}},
        {"GET", "/session/{id}", "Session state for both modules, without per-case records.", "participant", nullptr,
         {{"200", "session summary"}, {"404", "unknown participant"}}},
        {"POST", "/session/{id}/phase/start", "Start the pending phase of a module.", "participant",
         {{"module", "localize"}, {"phase", "pretest"}},
         {{"200", "session summary with deadline"}, {"409", "illegal transition or module locked"}}},
        {"GET", "/session/{id}/case/next", "Current case: image refs, plus age and indication for Report.",
         "participant", nullptr, {{"200", "{case, session}; case is null when none is pending"}}},
        {"POST", "/session/{id}/submit/localize", "Submit boxes and Select findings for the current case.",
         "participant",
         {{"case_id", "c001"},
          {"entries", json::array({{{"class_id", "nodule_mass"},
                                    {"boxes", json::array({{{"x_min", 0.1}, {"y_min", 0.1}, {"x_max", 0.3}, {"y_max", 0.3}}})}}})}},
         {{"200", "acknowledgment (tests), grade and feedback (Gamified learning) or ground truth (Traditional learning)"},
          {"409", "wrong case or duplicate submission"},
          {"410", "deadline passed; phase finalized"},
          {"422", "malformed body; detail holds the field path"}}},
        {"POST", "/session/{id}/submit/report", "Submit a findings report for the current case.", "participant",
         {{"case_id", "r001"}, {"candidate", "No acute cardiopulmonary process."}},
         {{"200", "acknowledgment (tests), CRIMSON and Style output (Gamified learning) or reference findings"},
          {"409", "wrong case or duplicate submission"},
          {"410", "deadline passed; phase finalized"}}},
        {"GET", "/session/{id}/feedback/{case_id}", "Learning-phase response for a submitted case.", "participant",
         nullptr, {{"200", "same body as the submit response"}, {"404", "no learning submission for the case"}}},
        {"POST", "/session/{id}/report/{case_id}/overrides", "Radiologist overrides of judged report errors.",
         "operator",
         {{"phase", "learning"},
          {"overrides", json::array({{{"error_ref", {{"category", "b"}, {"index", 0}, {"text", "missed effusion"}}},
                                      {"action", "remove"},
                                      {"reviewer", "rad1"},
                                      {"reason", "not clinically significant"}}})}},
         {{"200", "updated report grade"}, {"404", "unknown error reference"}}},
        {"POST", "/reviews", "Record a 3-criterion review of a feedback item.", "operator",
         {{"feedback_item_ref", "p01/c001.nodule_mass"},
          {"reviewer", "rad1"},
          {"location_correct", 1},
          {"visual_features_correct", 1},
          {"subtype_correct", 0}},
         {{"201", "recorded"}, {"404", "unknown feedback item"}}},
        {"GET", "/reviews/summary", "Review agreement rates; CSV with ?format=csv.", "operator", nullptr,
         {{"200", "rates"}}},
        {"GET", "/analytics/summary", "Outcome rows, group statistics and time curves.", "operator", nullptr,
         {{"200", "analytics summary"}}},
        {"GET", "/images/{path}", "Case images from the configured image root.", "none", nullptr,
         {{"200", "image bytes"}, {"404", "missing file"}}},
        {"GET", "/overlays/{path}", "Rendered feedback overlays.", "none", nullptr,
         {{"200", "PNG bytes"}, {"404", "missing file"}}},
    };
    return routes;
}

json openapi_document() {
    json paths = json::object();
    for (const auto& r : route_table()) {
        json op{{"summary", r.summary}, {"x-auth", r.auth}};
        json responses = json::object();
        for (const auto& [status, desc] : r.responses.items()) responses[status] = {{"description", desc}};
        op["responses"] = responses;
        if (!r.request_body.is_null()) {
            op["requestBody"] = {{"content", {{"application/json", {{"example", r.request_body}}}}}};
        }
        json params = json::array();
        std::string p = r.path;
        for (std::size_t pos = p.find('{'); pos != std::string::npos; pos = p.find('{', pos + 1)) {
            const auto end = p.find('}', pos);
            params.push_back({{"name", p.substr(pos + 1, end - pos - 1)}, {"in", "path"}, {"required", true},
                              {"schema", {{"type", "string"}}}});
        }
        if (!params.empty()) op["parameters"] = params;
        std::string method = r.method;
        for (auto& c : method) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        paths[std::string(kApiPrefix) + r.path][method] = op;
    }
    return json{{"openapi", "3.0.3"},
                {"info", {{"title", "RadGame API"}, {"version", std::string(radgame_version())}}},
                {"components",
                 {{"securitySchemes", {{"bearer", {{"type", "http"}, {"scheme", "bearer"}}}}},
                  {"schemas",
                   {{"Error",
                     {{"type", "object"},
                      {"required", json::array({"code", "message", "detail"})},
                      {"properties",
                       {{"code", {{"type", "string"}}},
                        {"message", {{"type", "string"}}},
                        {"detail", {{"type", "string"}}}}}}}}}}},
                {"paths", paths}};
}

json session_summary(const StudyEngine& engine, const std::string& participant_id) {
    const auto a = engine.assignment(participant_id);
    const StudyPlan plan = engine.plan();
    json modules = json::object();
    for (Module m : {Module::localize, Module::report}) {
        const StudySession s = engine.session(participant_id, m);
        json expired = json::array();
        for (auto p : s.expired_phases) expired.push_back(to_string(p));
        json submitted = json::object();
        for (Phase p : {Phase::pretest, Phase::learning, Phase::posttest}) {
            submitted[std::string(to_string(p))] = s.records_in(p).size();
        }
        modules[std::string(to_string(m))] = {
            {"group", to_string(s.group)},
            {"phase", to_string(s.phase)},
            {"phase_started", s.phase_started},
            {"cursor", s.cursor},
            {"total", s.phase == Phase::done ? 0 : plan.set(m, s.phase).case_ids.size()},
            {"deadline", s.deadline ? json(*s.deadline) : json(nullptr)},
            {"submitted", submitted},
            {"expired_phases", expired}};
    }
    return json{{"participant_id", participant_id},
                {"assignment", a},
                {"active_module", to_string(engine.active_module(participant_id))},
                {"modules", modules}};
}

struct ApiServer::Impl {
    StudyEngine& engine;
    ServerOptions options;
    httplib::Server http;
    std::mutex idem_mutex;
    std::map<std::string, std::pair<int, std::string>> idem_cache;
    std::atomic<bool> stopping{false};
    std::mutex sweep_mutex;
    std::condition_variable sweep_cv;
    std::thread sweeper;

    Impl(StudyEngine& e, ServerOptions o) : engine(e), options(std::move(o)) {}

    enum class Principal { anonymous, participant, op };
    struct Caller {
        Principal kind = Principal::anonymous;
        std::string participant_id;
        bool presented = false;  // a non-empty bearer token was sent
    };

    Caller identify(const httplib::Request& req) const {
        Caller c;
        const auto header = req.get_header_value("Authorization");
        const std::string prefix = "Bearer ";
        if (header.rfind(prefix, 0) != 0) return c;
        const std::string token = header.substr(prefix.size());
        if (token.empty()) return c;
        c.presented = true;
        if (!options.operator_token.empty() && token == options.operator_token) {
            c.kind = Principal::op;
            return c;
        }
        if (auto id = engine.participant_for_token(sha256_hex(token))) {
            c.kind = Principal::participant;
            c.participant_id = *id;
        }
        return c;
    }

    static void require_operator(const Caller& c, const httplib::Request&) {
        if (c.kind == Principal::op) return;
        if (!c.presented) throw Error(ErrorCode::auth_missing, "operator bearer token required");
        throw Error(ErrorCode::auth_rejected, "operator bearer token required");
    }

    static void require_session_access(const Caller& c, const httplib::Request&, const std::string& id) {
        if (c.kind == Principal::op) return;
        if (c.kind == Principal::participant && c.participant_id == id) return;
        if (!c.presented) throw Error(ErrorCode::auth_missing, "bearer token required");
        throw Error(ErrorCode::auth_rejected, "token does not grant access to session '" + id + "'");
    }

    static json body_json(const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        try {
            return json::parse(req.body);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error, "request body is not valid JSON", e.what());
        }
    }

    static void send(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    using Handler = std::function<std::pair<int, json>(const httplib::Request&, const Caller&)>;

    // Wraps a handler with error mapping and, for state-changing routes,
    // replay of responses by Idempotency-Key.
    httplib::Server::Handler wrap(Handler h, bool mutating) {
        return [this, h = std::move(h), mutating](const httplib::Request& req, httplib::Response& res) {
            std::string cache_key;
            try {
                const Caller caller = identify(req);
                const auto key = req.get_header_value("Idempotency-Key");
                if (mutating && !key.empty()) {
                    cache_key = req.method + " " + req.path + " " + caller.participant_id + " " + key;
                    std::lock_guard lock(idem_mutex);
                    if (auto it = idem_cache.find(cache_key); it != idem_cache.end()) {
                        res.status = it->second.first;
                        res.set_content(it->second.second, "application/json");
                        res.set_header("Idempotent-Replay", "true");
                        return;
                    }
                }
                auto [status, body] = h(req, caller);
                send(res, status, body);
                if (!cache_key.empty() && status < 300) {
                    std::lock_guard lock(idem_mutex);
                    idem_cache.emplace(cache_key, std::make_pair(status, body.dump()));
                }
            } catch (const Error& e) {
                send(res, http_status_for(e.code()), error_body(e));
            } catch (const json::exception& e) {
                send(res, 422, json{{"code", "schema_violation"}, {"message", "malformed request"}, {"detail", e.what()}});
            } catch (const std::exception& e) {
                send(res, 500, json{{"code", "internal"}, {"message", e.what()}, {"detail", ""}});
            }
        };
    }

    static Module module_param(const httplib::Request& req, const json& body, Module fallback) {
        if (body.is_object() && body.contains("module")) return parse_module(body["module"].get<std::string>());
        if (req.has_param("module")) return parse_module(req.get_param_value("module"));
        return fallback;
    }

    json analytics_summary(const httplib::Request& req) const {
        const auto rows = engine.outcomes();
        json curves = json::object();
        for (Module m : {Module::localize, Module::report}) {
            std::size_t bin = m == Module::localize ? options.time_curve_bin_localize : options.time_curve_bin_report;
            if (req.has_param("bin")) bin = std::stoul(req.get_param_value("bin"));
            json per_group = json::object();
            for (Group g : {Group::gamified, Group::traditional}) {
                per_group[std::string(to_string(g))] = time_curve(engine.learning_times(m, g), bin);
            }
            curves[std::string(to_string(m))] = per_group;
        }
        json improvements = json::array();
        for (const auto& r : rows) {
            const auto imp = relative_improvement(r.pre_score, r.post_score);
            improvements.push_back({{"participant_id", r.participant_id},
                                    {"module", to_string(r.module)},
                                    {"group", to_string(r.group)},
                                    {"improvement", imp}});
        }
        return json{{"outcomes", rows},
                    {"improvements", improvements},
                    {"modules", summarize(rows)},
                    {"time_curves", curves},
                    {"pending_report_grades", engine.pending_count()}};
    }

    void install_routes() {
        const std::string api = kApiPrefix;
        http.Get(api + "/healthz", wrap([this](const httplib::Request&, const Caller&) {
                     return std::make_pair(200, json{{"status", "ok"},
                                                     {"version", std::string(radgame_version())},
                                                     {"study_initialized", engine.initialized()},
                                                     {"participants", engine.participants().size()}});
                 }, false));

        http.Post(api + "/participants", wrap([this](const httplib::Request& req, const Caller& c) {
                      require_operator(c, req);
                      const json body = body_json(req);
                      if (!body.contains("participant_id") || !body["participant_id"].is_string()) {
                          throw Error(ErrorCode::schema_violation, "participant_id: required string", "participant_id");
                      }
                      const std::string id = body["participant_id"].get<std::string>();
                      const std::string token = mint_token();
                      engine.register_participant(id, sha256_hex(token));
                      return std::make_pair(201, json{{"participant_id", id}, {"token", token}});
                  }, true));

        http.Post(api + "/study/assign", wrap([this](const httplib::Request& req, const Caller& c) {
                      require_operator(c, req);
                      const json body = body_json(req);
                      const auto seed = body.value("seed", std::uint64_t{0});
                      return std::make_pair(200, json{{"assignments", engine.assign(seed)}});
                  }, true));

        http.Get(api + R"(/session/([^/]+))", wrap([this](const httplib::Request& req, const Caller& c) {
                     const std::string id = req.matches[1];
                     require_session_access(c, req, id);
                     return std::make_pair(200, session_summary(engine, id));
                 }, false));

        http.Post(api + R"(/session/([^/]+)/phase/start)", wrap([this](const httplib::Request& req, const Caller& c) {
                      const std::string id = req.matches[1];
                      require_session_access(c, req, id);
                      const json body = body_json(req);
                      if (!body.contains("phase") || !body["phase"].is_string()) {
                          throw Error(ErrorCode::schema_violation, "phase: required string", "phase");
                      }
                      const Module m = module_param(req, body, engine.active_module(id));
                      engine.start_phase(id, m, parse_phase(body["phase"].get<std::string>()));
                      return std::make_pair(200, session_summary(engine, id));
                  }, true));

        http.Get(api + R"(/session/([^/]+)/case/next)", wrap([this](const httplib::Request& req, const Caller& c) {
                     const std::string id = req.matches[1];
                     require_session_access(c, req, id);
                     const Module m = module_param(req, json(nullptr), engine.active_module(id));
                     json next = engine.next_case(id, m);
                     return std::make_pair(200, json{{"case", next}, {"session", session_summary(engine, id)}});
                 }, false));

        http.Post(api + R"(/session/([^/]+)/submit/localize)",
                  wrap([this](const httplib::Request& req, const Caller& c) {
                      const std::string id = req.matches[1];
                      require_session_access(c, req, id);
                      const auto submission = parse_localize_submission(body_json(req), engine.datasets().taxonomy);
                      return std::make_pair(
                          200, engine.submit_localize(id, submission, req.get_header_value("Idempotency-Key")));
                  }, true));

        http.Post(api + R"(/session/([^/]+)/submit/report)", wrap([this](const httplib::Request& req, const Caller& c) {
                      const std::string id = req.matches[1];
                      require_session_access(c, req, id);
                      const json body = body_json(req);
                      if (!body.contains("case_id") || !body["case_id"].is_string()) {
                          throw Error(ErrorCode::schema_violation, "case_id: required string", "case_id");
                      }
                      if (!body.contains("candidate") || !body["candidate"].is_string()) {
                          throw Error(ErrorCode::schema_violation, "candidate: required string", "candidate");
                      }
                      return std::make_pair(200, engine.submit_report(id, body["case_id"].get<std::string>(),
                                                                      body["candidate"].get<std::string>(),
                                                                      req.get_header_value("Idempotency-Key")));
                  }, true));

        http.Get(api + R"(/session/([^/]+)/feedback/([^/]+))", wrap([this](const httplib::Request& req, const Caller& c) {
                     const std::string id = req.matches[1];
                     require_session_access(c, req, id);
                     return std::make_pair(200, engine.feedback(id, req.matches[2]));
                 }, false));

        http.Post(api + R"(/session/([^/]+)/report/([^/]+)/overrides)",
                  wrap([this](const httplib::Request& req, const Caller& c) {
                      require_operator(c, req);
                      const json body = body_json(req);
                      const Phase phase = parse_phase(body.value("phase", std::string("learning")));
                      const auto overrides = body.value("overrides", std::vector<Override>{});
                      const auto grade = engine.override_report(req.matches[1], phase, req.matches[2], overrides);
                      return std::make_pair(200, json(grade));
                  }, true));

        http.Post(api + "/reviews", wrap([this](const httplib::Request& req, const Caller& c) {
                      require_operator(c, req);
                      const auto review = body_json(req).get<FeedbackReview>();
                      engine.record_review(review);
                      return std::make_pair(201, json{{"status", "recorded"}, {"review", review}});
                  }, true));

        http.Get(api + "/reviews/summary", [this](const httplib::Request& req, httplib::Response& res) {
            wrap([this](const httplib::Request& r, const Caller& c) {
                require_operator(c, r);
                ReviewFilter f;
                if (r.has_param("reviewer")) f.reviewer = r.get_param_value("reviewer");
                if (r.has_param("class_id")) f.class_id = r.get_param_value("class_id");
                if (r.has_param("source")) f.source = parse_feedback_source(r.get_param_value("source"));
                const auto rates = engine.review_rates(f);
                auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
                return std::make_pair(200, json{{"reviews", rates.reviews},
                                                {"location_correct", opt(rates.location)},
                                                {"visual_features_correct", opt(rates.visual_features)},
                                                {"subtype_correct", opt(rates.subtype)}});
            }, false)(req, res);
            if (res.status == 200 && req.get_param_value("format") == "csv") {
                res.set_content(engine.reviews_csv(), "text/csv");
            }
        });

        http.Get(api + "/analytics/summary", wrap([this](const httplib::Request& req, const Caller& c) {
                     require_operator(c, req);
                     return std::make_pair(200, analytics_summary(req));
                 }, false));

        if (!options.image_root.empty() && std::filesystem::is_directory(options.image_root)) {
            http.set_mount_point(api + "/images", options.image_root.string());
        }
        if (!options.overlay_root.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(options.overlay_root, ec);
            http.set_mount_point(api + "/overlays", options.overlay_root.string());
        }
        http.set_payload_max_length(8u * 1024u * 1024u);
    }

    void sweep_loop() {
        const auto interval = std::chrono::duration<double>(options.sweep_interval_seconds);
        std::unique_lock lock(sweep_mutex);
        while (!stopping) {
            sweep_cv.wait_for(lock, interval, [this] { return stopping.load(); });
            if (stopping) break;
            try {
                engine.expire_overdue();
                engine.rejudge_pending();
            } catch (const std::exception&) {
            }
        }
    }
};

ApiServer::ApiServer(StudyEngine& engine, ServerOptions options)
    : impl_(std::make_unique<Impl>(engine, std::move(options))) {
    impl_->install_routes();
}

ApiServer::~ApiServer() {
    stop();
    if (impl_->sweeper.joinable()) impl_->sweeper.join();
}

int ApiServer::bind() {
    auto& o = impl_->options;
    int port = o.port;
    if (port == 0) {
        port = impl_->http.bind_to_any_port(o.host);
        if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + o.host);
    } else if (!impl_->http.bind_to_port(o.host, port)) {
        throw Error(ErrorCode::io_error, "cannot bind " + o.host + ":" + std::to_string(port) + " (port busy?)");
    }
    o.port = port;
    return port;
}

void ApiServer::run() {
    if (impl_->options.sweep_interval_seconds > 0 && !impl_->sweeper.joinable()) {
        impl_->sweeper = std::thread([this] { impl_->sweep_loop(); });
    }
    impl_->http.listen_after_bind();
}

void ApiServer::stop() {
    {
        std::lock_guard lock(impl_->sweep_mutex);
        impl_->stopping = true;
    }
    impl_->sweep_cv.notify_all();
    impl_->http.stop();
}

}  // namespace radgame
