#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radgame/gateway/gateway.hpp"
#include "radgame/gateway/stub.hpp"
#include "radgame/ingest/ingest.hpp"
#include "radgame/study/engine.hpp"

namespace radgame {

enum class GatewayMode { stub, http };

// Relative paths are resolved against the directory of the config file.
//
// {
//   "datasets": {"localize": "...jsonl", "report": "...jsonl", "image_root": "images"},
//   "taxonomy": "default" | "interstitial" | "path/to/taxonomy.json",
//   "gateway": {"mode": "stub"|"http", "fixtures": "stub.json", "endpoints": [{...}]},
//   "phase_sizes": {"localize": {"pretest": 25, "learning": 375, "posttest": 25}, "report": {...}},
//   "timer_minutes": 45,
//   "iou_threshold": 0.25,
//   "bind": {"host": "127.0.0.1", "port": 8080},
//   "store_dir": "study",
//   "overlay_dir": "overlays",
//   "operator_token_env": "RADGAME_OPERATOR_TOKEN",
//   "curation_seed": 1
// }
struct AppConfig {
    std::filesystem::path base_dir;
    std::filesystem::path localize_dataset;
    std::filesystem::path report_dataset;
    std::filesystem::path image_root;
    std::string taxonomy = "default";
    GatewayMode gateway_mode = GatewayMode::stub;
    std::filesystem::path stub_fixtures;  // empty: every request gets the no-findings fallback
    std::vector<ModelEndpointConfig> endpoints;
    PhaseSizes localize_sizes = default_phase_sizes(Module::localize);
    PhaseSizes report_sizes = default_phase_sizes(Module::report);
    double timer_minutes = 45.0;
    double iou_threshold = 0.25;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path store_dir = "study";
    std::filesystem::path overlay_dir;
    std::string operator_token_env = "RADGAME_OPERATOR_TOKEN";
    std::uint64_t curation_seed = 1;

    std::filesystem::path events_path() const { return store_dir / "events.jsonl"; }
    std::filesystem::path state_path() const { return store_dir / "state.json"; }
    const PhaseSizes& sizes(Module m) const { return m == Module::localize ? localize_sizes : report_sizes; }

    static AppConfig from_json(const json& j, const std::filesystem::path& base_dir);
    static AppConfig load(const std::filesystem::path& path);  // Error(config_error)
    json to_json() const;
};

TaxonomyConfig load_taxonomy(const AppConfig& cfg);

// Reads the canonical case files. Throws Error(config_error) naming the
// missing dataset.
StudyDatasets load_datasets(const AppConfig& cfg);

std::unique_ptr<Gateway> make_gateway(const AppConfig& cfg, std::shared_ptr<Clock> clock = std::make_shared<Clock>());

StudyPlan curate_plan(const AppConfig& cfg, const StudyDatasets& data);

FeedbackOptions feedback_options(const AppConfig& cfg);

struct StudyRuntime {
    AppConfig config;
    std::unique_ptr<Gateway> gateway;
    std::unique_ptr<StudyEngine> engine;
};

// Opens the event log in store_dir and replays it into a fresh engine.
StudyRuntime open_study(const AppConfig& cfg, std::shared_ptr<StudyClock> clock = std::make_shared<StudyClock>(),
                        std::shared_ptr<Clock> gateway_clock = std::make_shared<Clock>());

// Writes the current snapshot to the state file.
void save_state(const StudyRuntime& rt);

std::string mint_token();
std::string sha256_hex(std::string_view text);

}  // namespace radgame
