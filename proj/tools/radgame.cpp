#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "radgame/api/config.hpp"
#include "radgame/api/server.hpp"
#include "radgame/core/csv.hpp"
#include "radgame/core/error.hpp"
#include "radgame/report/judge.hpp"

using namespace radgame;

namespace {

std::string config_path;

AppConfig load_config() {
    if (!config_path.empty()) return AppConfig::load(config_path);
    if (std::filesystem::exists("radgame.json")) return AppConfig::load("radgame.json");
    return AppConfig::from_json(json::object(), std::filesystem::current_path());
}

void write_or_print(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_text_file(out, text);
    }
}

std::string fraction(std::size_t num, std::size_t den) {
    if (den == 0) return "1/1";
    return std::to_string(num) + "/" + std::to_string(den);
}

ApiServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RadGame: gamified radiology training server and study tooling", "radgame"};
    app.add_option("--config", config_path, "Config file (JSON)");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(radgame_version()));

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Normalize source annotations into case files");
    ingest->require_subcommand(1);
    ingest->fallthrough();
    std::string in_path, out_path, units = "pixel", report_path, taxonomy_override;
    auto* ingest_loc = ingest->add_subcommand("localize", "Localize rows (CSV or JSONL) to cases JSONL");
    ingest_loc->add_option("--input", in_path, "Source rows")->required();
    ingest_loc->add_option("--out", out_path, "Output cases JSONL")->required();
    ingest_loc->add_option("--units", units, "Box units: pixel or normalized");
    ingest_loc->add_option("--report", report_path, "Write the ingest report JSON here");
    ingest_loc->add_option("--taxonomy", taxonomy_override, "default, interstitial or a taxonomy file");
    ingest_loc->fallthrough();
    auto* ingest_rep = ingest->add_subcommand("report", "Report rows (CSV or JSONL) to cases JSONL");
    ingest_rep->add_option("--input", in_path, "Source rows")->required();
    ingest_rep->add_option("--out", out_path, "Output cases JSONL")->required();
    ingest_rep->add_option("--report", report_path, "Write the ingest report JSON here");
    ingest_rep->fallthrough();

    // curate
    auto* curate = app.add_subcommand("curate", "Curate pre/learning/post case sets from the configured datasets");
    curate->fallthrough();
    std::string module_name = "localize", dist_path;
    std::uint64_t seed = 1;
    bool seed_given = false;
    curate->add_option("--module", module_name, "localize or report");
    curate->add_option("--seed", seed, "Curation seed")->each([&](const std::string&) { seed_given = true; });
    curate->add_option("--out", out_path, "Output sets JSON (default stdout)");
    curate->add_option("--distribution", dist_path, "Write the case distribution JSON here");

    // study
    auto* study = app.add_subcommand("study", "Study administration");
    study->require_subcommand(1);
    study->fallthrough();
    std::string participants_csv;
    auto* study_init = study->add_subcommand("init", "Curate sets, register and assign participants");
    study_init->add_option("--participants", participants_csv, "CSV with a participant_id column")->required();
    study_init->add_option("--seed", seed, "Assignment seed")->required();
    study_init->fallthrough();
    auto* study_status = study->add_subcommand("status", "Per-participant progress");
    study_status->fallthrough();
    auto* study_export = study->add_subcommand("export", "Write outcomes, state snapshot and reviews");
    std::string export_dir;
    study_export->add_option("--out", export_dir, "Output directory")->required();
    study_export->fallthrough();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->fallthrough();
    int port_override = -1;
    serve->add_option("--port", port_override, "Override bind.port");

    // score-report
    auto* score = app.add_subcommand("score-report", "CRIMSON and Style scoring of one candidate report");
    score->fallthrough();
    std::string case_file, candidate_file, reference_text, indication_text;
    int age = -1;
    bool no_style = false;
    score->add_option("--case", case_file, "Report case JSON (reference, age, indication)");
    score->add_option("--reference", reference_text, "Reference findings (instead of --case)");
    score->add_option("--age", age, "Patient age in years (with --reference)");
    score->add_option("--indication", indication_text, "Indication (with --reference)");
    score->add_option("--candidate", candidate_file, "Candidate report file ('-' for stdin)")->required();
    score->add_flag("--no-style", no_style, "Skip the Style judge");

    // grade-localize
    auto* grade = app.add_subcommand("grade-localize", "Grade localize submissions against cases");
    grade->fallthrough();
    std::string cases_path, subs_path;
    double threshold = -1;
    grade->add_option("--cases", cases_path, "Cases JSONL")->required();
    grade->add_option("--submissions", subs_path, "Submissions JSONL")->required();
    grade->add_option("--threshold", threshold, "IoU threshold (default from config)");
    grade->add_option("--out", out_path, "Output CSV (default stdout)");

    // stats
    auto* stats = app.add_subcommand("stats", "Significance tests over an outcomes table");
    stats->fallthrough();
    std::string outcomes_path, test_name = "mwu", sided;
    std::string group_name = "gamified";
    stats->add_option("--outcomes", outcomes_path, "Outcomes CSV or JSON")->required();
    stats->add_option("--test", test_name, "mwu (Gamified vs Traditional on post - pre) or wilcoxon (pre vs post)")
        ->check(CLI::IsMember({"mwu", "wilcoxon"}));
    stats->add_option("--sided", sided, "one or two (default: two for mwu, one for wilcoxon)")
        ->check(CLI::IsMember({"one", "two"}));
    stats->add_option("--module", module_name, "localize or report");
    stats->add_option("--group", group_name, "Group for wilcoxon");
    stats->add_option("--out", out_path, "Output .csv or .json (default: JSON on stdout)");

    // curves
    auto* curves = app.add_subcommand("curves", "Time-per-case curves from the study store");
    curves->fallthrough();
    std::size_t bin = 0;
    std::string curve_group;
    curves->add_option("--bin", bin, "Cases per bin (default 25 Localize, 10 Report)");
    curves->add_option("--module", module_name, "localize or report");
    curves->add_option("--group", curve_group, "gamified or traditional (default both pooled)");
    curves->add_option("--out", out_path, "Output .csv or .json (default: CSV on stdout)");

    // openapi
    auto* openapi = app.add_subcommand("openapi", "Print the OpenAPI document");
    openapi->fallthrough();
    openapi->add_option("--out", out_path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (ingest_loc->parsed()) {
            AppConfig cfg = load_config();
            if (!taxonomy_override.empty()) cfg.taxonomy = taxonomy_override;
            auto result = load_localize_dataset(read_source_rows(in_path), load_taxonomy(cfg), parse_box_units(units));
            write_localize_cases(out_path, result.cases);
            const json rep = result.report.to_json();
            if (!report_path.empty()) write_text_file(report_path, rep.dump(2) + "\n");
            std::cerr << "ingested " << result.cases.size() << " cases from " << result.report.rows_read << " rows ("
                      << result.report.rejected_rows.size() << " rejected, " << result.report.unmapped_labels.size()
                      << " unmapped labels)\n";
            return 0;
        }
        if (ingest_rep->parsed()) {
            auto result = load_report_dataset(read_source_rows(in_path));
            write_report_cases(out_path, result.cases);
            if (!report_path.empty()) write_text_file(report_path, result.report.to_json().dump(2) + "\n");
            std::cerr << "ingested " << result.cases.size() << " cases from " << result.report.rows_read << " rows ("
                      << result.report.excluded.size() << " excluded for prior references, "
                      << result.report.rejected.size() << " rejected)\n";
            return 0;
        }
        if (curate->parsed()) {
            AppConfig cfg = load_config();
            if (seed_given) cfg.curation_seed = seed;
            const auto data = load_datasets(cfg);
            const Module m = parse_module(module_name);
            const StudySets sets = m == Module::localize
                                       ? curate_study_sets(data.localize_cases, cfg.localize_sizes, cfg.curation_seed)
                                       : curate_study_sets(data.report_cases, cfg.report_sizes, cfg.curation_seed);
            const json j{{"pretest", sets.pretest}, {"learning", sets.learning}, {"posttest", sets.posttest}};
            write_or_print(out_path, j.dump(2) + "\n");
            if (!dist_path.empty()) {
                const auto d = m == Module::localize ? case_distribution(data.localize_cases, data.taxonomy)
                                                     : case_distribution(data.report_cases);
                write_text_file(dist_path, d.to_json().dump(2) + "\n");
            }
            return 0;
        }
        if (study_init->parsed()) {
            const AppConfig cfg = load_config();
            auto rt = open_study(cfg);
            if (rt.engine->initialized()) {
                throw Error(ErrorCode::illegal_transition,
                            "study already initialized in " + cfg.store_dir.string());
            }
            const auto table = csv::read_table(participants_csv);
            const int col = table.column("participant_id") >= 0 ? table.column("participant_id") : 0;
            rt.engine->initialize(curate_plan(cfg, rt.engine->datasets()));
            csv::Table tokens;
            tokens.header = {"participant_id", "token"};
            for (const auto& row : table.rows) {
                if (row.empty() || row[col].empty()) continue;
                const std::string token = mint_token();
                rt.engine->register_participant(row[col], sha256_hex(token));
                tokens.rows.push_back({row[col], token});
            }
            const auto assignments = rt.engine->assign(seed);
            write_text_file(cfg.store_dir / "tokens.csv", csv::format_table(tokens));
            save_state(rt);
            csv::Table out;
            out.header = {"participant_id", "localize_group", "report_group"};
            for (const auto& a : assignments) {
                out.rows.push_back({a.participant_id, std::string(to_string(a.localize_group)),
                                    std::string(to_string(a.report_group))});
            }
            std::cout << csv::format_table(out);
            std::cerr << "tokens written to " << (cfg.store_dir / "tokens.csv").string() << "\n";
            return 0;
        }
        if (study_status->parsed()) {
            auto rt = open_study(load_config());
            csv::Table out;
            out.header = {"participant_id", "localize_group", "localize_phase", "localize_submitted",
                          "report_group",   "report_phase",   "report_submitted"};
            for (const auto& id : rt.engine->participants()) {
                try {
                    const auto l = rt.engine->session(id, Module::localize);
                    const auto r = rt.engine->session(id, Module::report);
                    out.rows.push_back({id, std::string(to_string(l.group)), std::string(to_string(l.phase)),
                                        std::to_string(l.records.size()), std::string(to_string(r.group)),
                                        std::string(to_string(r.phase)), std::to_string(r.records.size())});
                } catch (const Error&) {
                    out.rows.push_back({id, "", "unassigned", "0", "", "unassigned", "0"});
                }
            }
            std::cout << csv::format_table(out);
            std::cerr << rt.engine->pending_count() << " report grades pending\n";
            return 0;
        }
        if (study_export->parsed()) {
            auto rt = open_study(load_config());
            const std::filesystem::path dir = export_dir;
            const auto rows = rt.engine->outcomes();
            export_outcomes(dir / "outcomes.csv", rows);
            export_outcomes(dir / "outcomes.json", rows);
            write_text_file(dir / "state.json", rt.engine->snapshot().dump(2) + "\n");
            write_text_file(dir / "reviews.csv", rt.engine->reviews_csv());
            json summary = summarize(rows);
            write_text_file(dir / "summary.json", summary.dump(2) + "\n");
            std::cerr << rows.size() << " outcome rows written to " << dir.string() << "\n";
            return 0;
        }
        if (serve->parsed()) {
            AppConfig cfg = load_config();
            if (port_override >= 0) cfg.port = port_override;
            auto rt = open_study(cfg);
            ServerOptions opts;
            opts.host = cfg.host;
            opts.port = cfg.port;
            opts.image_root = cfg.image_root;
            opts.overlay_root = cfg.overlay_dir;
            if (const char* tok = std::getenv(cfg.operator_token_env.c_str())) opts.operator_token = tok;
            if (opts.operator_token.empty()) {
                std::cerr << "warning: " << cfg.operator_token_env << " is unset; operator endpoints are disabled\n";
            }
            ApiServer server(*rt.engine, opts);
            const int port = server.bind();
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << cfg.host << ":" << port << kApiPrefix << std::endl;
            server.run();
            g_server = nullptr;
            save_state(rt);
            return 0;
        }
        if (score->parsed()) {
            const AppConfig cfg = load_config();
            ReportCase c;
            if (!case_file.empty()) {
                c = json::parse(read_text_file(case_file)).get<ReportCase>();
            } else {
                if (reference_text.empty() || age < 0 || indication_text.empty()) {
                    throw Error(ErrorCode::invalid_argument, "give --case, or --reference with --age and --indication");
                }
                c.case_id = "cli";
                c.age_years = age;
                c.indication = indication_text;
                c.reference_findings = reference_text;
            }
            std::string candidate;
            if (candidate_file == "-") {
                candidate.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
            } else {
                candidate = read_text_file(candidate_file);
            }
            auto gateway = make_gateway(cfg);
            ReportJudge judge(*gateway);
            json out;
            if (no_style) {
                out = make_grade(judge.judge_crimson(c, candidate));
            } else {
                out = judge.grade(c, candidate);
            }
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (grade->parsed()) {
            const AppConfig cfg = load_config();
            const auto taxonomy = load_taxonomy(cfg);
            const double t = threshold > 0 ? threshold : cfg.iou_threshold;
            std::map<std::string, LocalizeCase> cases;
            for (auto& c : read_localize_cases(cases_path)) cases.emplace(c.case_id, c);
            csv::Table out;
            out.header = {"case_id", "true_positives", "false_negatives", "false_positives", "accuracy",
                          "accuracy_fraction", "recall"};
            for (const auto& j : read_jsonl(subs_path)) {
                const auto sub = j.get<LocalizeSubmission>();
                auto it = cases.find(sub.case_id);
                if (it == cases.end()) throw Error(ErrorCode::not_found, "unknown case '" + sub.case_id + "'");
                const auto r = grade_case(sub, it->second, taxonomy, t);
                char acc[32], rec[32];
                std::snprintf(acc, sizeof acc, "%.6f", r.case_accuracy);
                std::snprintf(rec, sizeof rec, "%.6f", r.recall);
                out.rows.push_back({r.case_id, std::to_string(r.true_positives), std::to_string(r.false_negatives),
                                    std::to_string(r.false_positives), acc,
                                    fraction(r.true_positives, r.true_positives + r.false_negatives + r.false_positives),
                                    rec});
            }
            write_or_print(out_path, csv::format_table(out));
            return 0;
        }
        if (stats->parsed()) {
            const auto rows = import_outcomes(outcomes_path);
            const Module m = parse_module(module_name);
            StatResult result;
            if (test_name == "mwu") {
                std::vector<double> gam, trad;
                for (const auto& r : rows) {
                    if (r.module != m) continue;
                    (r.group == Group::gamified ? gam : trad).push_back(r.post_score - r.pre_score);
                }
                result = mann_whitney_u(gam, trad, sided.empty() ? Sidedness::two : parse_sidedness(sided));
            } else {
                const Group g = parse_group(group_name);
                std::vector<double> pre, post;
                for (const auto& r : rows) {
                    if (r.module != m || r.group != g) continue;
                    pre.push_back(r.pre_score);
                    post.push_back(r.post_score);
                }
                result = wilcoxon_signed_rank(pre, post, sided.empty() ? Sidedness::one : parse_sidedness(sided));
            }
            if (out_path.empty()) {
                std::cout << json(result).dump(2) << "\n";
            } else {
                export_stats(out_path, {result});
            }
            return 0;
        }
        if (curves->parsed()) {
            auto rt = open_study(load_config());
            const Module m = parse_module(module_name);
            if (bin == 0) bin = m == Module::localize ? 25 : 10;
            std::optional<Group> g;
            if (!curve_group.empty()) g = parse_group(curve_group);
            const auto curve = time_curve(rt.engine->learning_times(m, g), bin);
            if (out_path.empty()) {
                std::cout << format_curve(curve, ExportFormat::csv);
            } else {
                export_curve(out_path, curve);
            }
            return 0;
        }
        if (openapi->parsed()) {
            write_or_print(out_path, openapi_document().dump(2) + "\n");
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << app.help();
    return 2;
}
