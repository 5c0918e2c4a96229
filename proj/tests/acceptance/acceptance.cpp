// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <array>
#include <bitset>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "radgame/analytics/analytics.hpp"
#include "radgame/api/config.hpp"
#include "radgame/api/server.hpp"
#include "radgame/core/geometry.hpp"
#include "radgame/core/random.hpp"
#include "radgame/core/serialization.hpp"
#include "radgame/ingest/ingest.hpp"
#include "radgame/localize/grading.hpp"
#include "radgame/report/assessment.hpp"
#include "radgame/report/prompts.hpp"
#include "stat_oracles.hpp"
#include "synthetic_study.hpp"

using namespace radgame;

namespace {

// pinned tolerances and budgets
constexpr int kGrid = 1000;
constexpr double kIouTolerance = 2e-3;
constexpr double kIouBudgetSeconds = 10.0;
constexpr double kStatTolerance = 1e-12;
constexpr double kStatBudgetSeconds = 60.0;
constexpr double kStudyBudgetSeconds = 120.0;
constexpr std::size_t kIouPairs = 10000;
constexpr std::size_t kCrimsonSamples = 1000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const Error& e) {
        o = {false, std::string("error: ") + e.what() + (e.detail().empty() ? "" : " (" + e.detail() + ")")};
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

// Collects failed expectations with a short reason each.
struct Checks {
    std::vector<std::string> problems;
    void expect(bool ok, const std::string& what) {
        if (!ok && problems.size() < 20) problems.push_back(what);
    }
    Outcome outcome(const std::string& ok_detail) const {
        if (problems.empty()) return {true, ok_detail};
        std::string d;
        for (const auto& p : problems) d += (d.empty() ? "" : "; ") + p;
        return {false, d};
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- IoU vs pixel counting ----

// Pixel (i, j) belongs to a box when its center lies inside it.
struct Raster {
    std::bitset<kGrid> cols;
    std::bitset<kGrid> rows;
};

Raster rasterize(const BoundingBox& b) {
    Raster r;
    for (int i = 0; i < kGrid; ++i) {
        const double c = (i + 0.5) / kGrid;
        r.cols[i] = c >= b.x_min && c <= b.x_max;
        r.rows[i] = c >= b.y_min && c <= b.y_max;
    }
    return r;
}

// Counts row by row: each row of a box mask is either its column set or empty.
double grid_iou(const Raster& a, const Raster& b) {
    const std::size_t na = a.cols.count(), nb = b.cols.count();
    const std::size_t both = (a.cols & b.cols).count(), either = (a.cols | b.cols).count();
    std::size_t inter = 0, uni = 0;
    for (int y = 0; y < kGrid; ++y) {
        const bool in_a = a.rows[y], in_b = b.rows[y];
        if (in_a && in_b) {
            inter += both;
            uni += either;
        } else if (in_a) {
            uni += na;
        } else if (in_b) {
            uni += nb;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::pair<int, int> lattice_span(Rng& rng) {
    int lo = static_cast<int>(rng.below(kGrid));
    int hi = static_cast<int>(rng.below(kGrid + 1));
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) hi = lo + 1;
    return {lo, hi};
}

BoundingBox lattice_box(Rng& rng) {
    const auto [x0, x1] = lattice_span(rng);
    const auto [y0, y1] = lattice_span(rng);
    return {x0 / double(kGrid), y0 / double(kGrid), x1 / double(kGrid), y1 / double(kGrid)};
}

// Corners moved by up to 120 pixels, so most pairs overlap.
BoundingBox lattice_neighbor(Rng& rng, const BoundingBox& a) {
    auto jitter = [&](double v) {
        const int p = static_cast<int>(std::lround(v * kGrid)) + static_cast<int>(rng.below(241)) - 120;
        return std::clamp(p, 0, kGrid);
    };
    int x0 = jitter(a.x_min), x1 = jitter(a.x_max), y0 = jitter(a.y_min), y1 = jitter(a.y_max);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    if (x0 == x1) x0 == kGrid ? --x0 : ++x1;
    if (y0 == y1) y0 == kGrid ? --y0 : ++y1;
    return {x0 / double(kGrid), y0 / double(kGrid), x1 / double(kGrid), y1 / double(kGrid)};
}

BoundingBox continuous_box(Rng& rng) {
    auto span = [&] {
        double lo = rng.unit(), hi = rng.unit();
        if (lo > hi) std::swap(lo, hi);
        if (hi - lo < 0.01) hi = std::min(1.0, lo + 0.01), lo = hi - 0.01;
        return std::make_pair(lo, hi);
    };
    const auto [x0, x1] = span();
    const auto [y0, y1] = span();
    return {x0, y0, x1, y1};
}

Outcome check_iou() {
    Checks c;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240601);
    double max_err = 0.0;
    std::size_t overlapping = 0;
    for (std::size_t k = 0; k < kIouPairs; ++k) {
        const BoundingBox a = lattice_box(rng);
        const BoundingBox b = k % 2 ? lattice_neighbor(rng, a) : lattice_box(rng);
        c.expect(!validate_box(a) && !validate_box(b), "generator produced an invalid box");
        const double v = iou(a, b);
        if (v > 0) ++overlapping;
        max_err = std::max(max_err, std::fabs(v - grid_iou(rasterize(a), rasterize(b))));
        c.expect(v == iou(b, a), "iou not symmetric");
        c.expect(iou(a, a) == 1.0 && iou(b, b) == 1.0, "iou(a, a) != 1");
    }
    c.expect(max_err <= kIouTolerance, "max |analytic - grid| = " + fmt("%.3g", max_err));

    // Off-lattice coordinates: counting at 1000x1000 discretizes box edges to
    // the pixel grid, so this error is reported but not gated.
    double continuous_err = 0.0;
    for (std::size_t k = 0; k < kIouPairs; ++k) {
        const BoundingBox a = continuous_box(rng), b = continuous_box(rng);
        const double v = iou(a, b);
        c.expect(v == iou(b, a), "continuous iou not symmetric");
        c.expect(iou(a, a) == 1.0, "continuous iou(a, a) != 1");
        continuous_err = std::max(continuous_err, std::fabs(v - grid_iou(rasterize(a), rasterize(b))));
    }
    const double secs = seconds_since(t0);
    c.expect(secs < kIouBudgetSeconds, "runtime " + fmt("%.2f", secs) + " s");
    return c.outcome(std::to_string(kIouPairs) + " pixel-lattice pairs (" + std::to_string(overlapping) +
                     " overlapping), max |err| " + fmt("%.3g", max_err) + " <= 2e-3; symmetric; self-iou 1; " +
                     fmt("%.2f", secs) + " s; off-lattice max |err| " + fmt("%.3g", continuous_err) +
                     " (informational)");
}

Outcome check_threshold() {
    Checks c;
    const std::vector<BoundingBox> gt = {{0.0, 0.0, 0.5, 0.5}};
    const std::vector<BoundingBox> exactly = {{0.0, 0.0, 1.0, 1.0}};
    c.expect(iou(exactly[0], gt[0]) == 0.25, "constructed pair is not exactly 0.25");
    c.expect(!grade_draw(exactly, gt).credited, "iou == 0.25 credited");
    const double s = 0.5 / std::sqrt(0.2500001);
    const std::vector<BoundingBox> above = {{0.0, 0.0, s, s}};
    const double v = iou(above[0], gt[0]);
    c.expect(std::fabs(v - 0.2500001) < 1e-12, "above pair iou " + fmt("%.10f", v));
    c.expect(grade_draw(above, gt).credited, "iou 0.2500001 not credited");
    return c.outcome("iou 0.25 not credited; iou " + fmt("%.7f", v) + " credited");
}

// ---- CRIMSON and style ----

CrimsonAssessment assessment(const std::vector<std::string>& matched, std::array<std::size_t, 4> errors) {
    CrimsonAssessment a;
    a.explanation = "acceptance";
    a.matched_findings = matched;
    for (std::size_t cat = 0; cat < 4; ++cat) {
        for (std::size_t k = 0; k < errors[cat]; ++k) a.errors[cat].push_back("error " + std::to_string(k));
    }
    return a;
}

Outcome check_crimson() {
    Checks c;
    const double s1 = crimson_score(assessment({}, {0, 1, 0, 0}));
    const double s2 = crimson_score(assessment({"bibasilar atelectasis", "mild cardiomegaly"}, {0, 0, 0, 0}));
    c.expect(s1 == 0.0, "scenario 1 scored " + fmt("%g", s1));
    c.expect(s2 == 100.0, "scenario 2 scored " + fmt("%g", s2));

    Rng rng(4242);
    for (std::size_t k = 0; k < kCrimsonSamples; ++k) {
        std::vector<std::string> matched(rng.below(8), "m");
        std::array<std::size_t, 4> errors{};
        for (auto& e : errors) e = rng.below(4);
        const double base = crimson_score(assessment(matched, errors));
        c.expect(base >= 0.0 && base <= 100.0, "score out of range");
        auto more_errors = errors;
        ++more_errors[rng.below(4)];
        c.expect(crimson_score(assessment(matched, more_errors)) <= base, "adding an error raised the score");
        auto more_matched = matched;
        more_matched.push_back("m");
        c.expect(crimson_score(assessment(more_matched, errors)) >= base, "adding a match lowered the score");
    }
    return c.outcome("scenario 1 = 0%, scenario 2 = 100%, monotone over " + std::to_string(kCrimsonSamples) +
                     " random assessments");
}

std::string erase_once(std::string s, const std::string& needle) {
    const auto at = s.find(needle);
    if (at != std::string::npos) s.erase(at, needle.size());
    return s;
}

std::string erase_all(std::string s, const std::string& needle) {
    for (auto at = s.find(needle); at != std::string::npos; at = s.find(needle, at)) s.erase(at, needle.size());
    return s;
}

Outcome check_prompts() {
    Checks c;
    const auto crimson_golden = read_text_file(testing::golden("crimson_prompt.stripped.golden"));
    const auto style_golden = read_text_file(testing::golden("style_prompt.stripped.golden"));
    const std::string ref = "\x01" "REF\x01", cand = "\x01" "CAND\x01";

    const std::string indication = "Wrist fracture, shortness of breath";
    const auto prompt = build_crimson_prompt(90, indication, ref, cand);
    c.expect(prompt.find("Age: 90\n") != std::string::npos, "age 90 header missing");
    c.expect(prompt.find("Indication: " + indication + "\n") != std::string::npos, "indication header missing");
    c.expect(prompt == build_crimson_prompt(90, indication, ref, cand), "prompt not deterministic");
    // removing exactly the substituted values must leave the template untouched
    std::string stripped = erase_once(prompt, "Age: 90");
    stripped.insert(prompt.find("Age: 90"), "Age: ");
    stripped = erase_once(stripped, indication);
    stripped = erase_all(erase_all(stripped, ref), cand);
    c.expect(stripped == crimson_golden, "stripped CRIMSON prompt differs from golden");

    const auto style = erase_all(build_style_prompt(cand), cand);
    c.expect(style == style_golden, "stripped style prompt differs from golden");
    return c.outcome("CRIMSON (" + std::to_string(crimson_golden.size()) + " bytes) and style (" +
                     std::to_string(style_golden.size()) + " bytes) match golden; age 90 and indication in place");
}

Outcome check_style() {
    Checks c;
    auto score = [](double sys, double org) {
        json j{{"systematic_evaluation_score", sys}, {"organization_language_score", org}};
        j["systematic_evaluation_recommendation"] = sys == 1.0 ? "" : "Review every region.";
        j["organization_language_recommendation"] = org == 1.0 ? "" : "Group related findings.";
        return style_score(parse_style_response(j.dump()));
    };
    c.expect(score(1, 1) == 100.0, "(1,1) != 100");
    c.expect(score(0, 0) == 0.0, "(0,0) != 0");
    c.expect(score(1, 0.5) == 75.0, "(1,0.5) != 75");
    std::size_t rejected = 0;
    for (double bad : {0.7, 2.0, -0.5, 5.0}) {
        try {
            score(bad, 1);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::out_of_scale) ++rejected;
        }
    }
    c.expect(rejected == 4, "out-of-scale values accepted");
    return c.outcome("(1,1)=100, (0,0)=0, (1,0.5)=75; 0.7, 2, -0.5, 5 rejected as out_of_scale");
}

// ---- statistics ----

Outcome check_statistics() {
    Checks c;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(99);
    auto draw = [&](std::size_t n, int levels) {
        std::vector<double> v(n);
        for (auto& x : v) x = static_cast<double>(rng.below(levels));
        return v;
    };
    double max_diff = 0.0;
    std::size_t configs = 0;
    for (std::size_t m = 1; m <= 9; ++m) {
        for (std::size_t n = 1; m + n <= 10; ++n) {
            for (int rep = 0; rep < 10; ++rep) {
                const int levels = rep % 3 == 0 ? 2 : rep % 3 == 1 ? 4 : 1000;
                const auto x = draw(m, levels), y = draw(n, levels);
                for (bool two : {false, true}) {
                    const auto r = mann_whitney_u(x, y, two ? Sidedness::two : Sidedness::one);
                    c.expect(r.method == TestMethod::exact, "MWU not exact");
                    max_diff = std::max(max_diff, std::fabs(r.p_value - oracle::mwu_p(x, y, two)));
                    ++configs;
                }
            }
        }
    }
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int rep = 0; rep < 10; ++rep) {
            const int levels = rep % 3 == 0 ? 3 : rep % 3 == 1 ? 6 : 1000;
            const auto pre = draw(n, levels);
            auto post = draw(n, levels);
            if (pre == post) post[0] += 1;
            for (bool two : {false, true}) {
                const auto r = wilcoxon_signed_rank(pre, post, two ? Sidedness::two : Sidedness::one);
                c.expect(r.method == TestMethod::exact, "Wilcoxon not exact");
                max_diff = std::max(max_diff, std::fabs(r.p_value - oracle::wilcoxon_p(pre, post, two)));
                ++configs;
            }
        }
    }
    c.expect(max_diff <= kStatTolerance, "max |p - oracle| = " + fmt("%.3g", max_diff));
    const double p_mwu = mann_whitney_u({1, 2}, {3, 4}, Sidedness::two).p_value;
    const double p_wil = wilcoxon_signed_rank({0, 0, 0}, {1, 2, 3}, Sidedness::one).p_value;
    c.expect(std::fabs(p_mwu - 1.0 / 3.0) <= kStatTolerance, "MWU [1,2] vs [3,4] p = " + fmt("%.15g", p_mwu));
    c.expect(std::fabs(p_wil - 1.0 / 8.0) <= kStatTolerance, "Wilcoxon [1,2,3] p = " + fmt("%.15g", p_wil));
    const double secs = seconds_since(t0);
    c.expect(secs < kStatBudgetSeconds, "runtime " + fmt("%.2f", secs) + " s");
    return c.outcome(std::to_string(configs) + " configurations, max |p - oracle| " + fmt("%.3g", max_diff) +
                     "; MWU p = " + fmt("%.15g", p_mwu) + "; Wilcoxon p = " + fmt("%.15g", p_wil) + "; " +
                     fmt("%.2f", secs) + " s");
}

// ---- ingest ----

Outcome check_ingest() {
    Checks c;
    const auto& tax = TaxonomyConfig::default_taxonomy();
    const auto* resolved = tax.resolve("lobar atelectasis");
    c.expect(resolved && resolved->display_name == "Atelectasis/Fibrotic band", "alias does not resolve");

    const auto rows = read_source_rows(testing::fixture("localize_consolidation.csv"));
    c.expect(rows.size() == 5, "consolidation fixture is not 5 rows");
    const auto loc = load_localize_dataset(rows, tax, BoxUnits::pixel);
    const LocalizeCase* c001 = nullptr;
    for (const auto& k : loc.cases) {
        if (k.case_id == "c001") c001 = &k;
    }
    c.expect(c001 != nullptr, "c001 missing");
    if (c001 && resolved) {
        const auto* atel = c001->find(resolved->id);
        c.expect(atel && atel->boxes.size() == 2, "same-class boxes not merged into one annotation");
        std::size_t atel_annotations = 0;
        for (const auto& a : c001->annotations) atel_annotations += a.class_id == resolved->id;
        c.expect(atel_annotations == 1, "duplicate annotations for one class");
    }

    const auto prior_rows = read_source_rows(testing::fixture("report_priors.jsonl"));
    c.expect(prior_rows.size() == 10, "prior fixture is not 10 rows");
    std::vector<std::string> kept;
    for (const auto& k : load_report_dataset(prior_rows).cases) kept.push_back(k.case_id);
    const std::vector<std::string> survivors = {"r01", "r03", "r05", "r06", "r07", "r09", "r10"};
    c.expect(kept == survivors, "prior exclusion kept the wrong cases");

    // 3 strata of 4 cases, n = 6: exactly 2 per stratum
    std::vector<LocalizeCase> pool;
    const std::vector<std::string> draw = {"nodule_mass", "consolidation", "fracture"};
    for (int d = 0; d < 3; ++d) {
        for (int k = 0; k < 4; ++k) {
            LocalizeCase lc;
            lc.case_id = "d" + std::to_string(d) + "_" + std::to_string(k);
            lc.image_ref = lc.case_id + ".png";
            lc.image_width_px = lc.image_height_px = 100;
            for (int f = 0; f < d; ++f) lc.annotations.push_back({draw[f], {{0.1, 0.1, 0.4, 0.4}}, true});
            pool.push_back(lc);
        }
    }
    const auto a = curate_test_set(pool, 6, 11), b = curate_test_set(pool, 6, 11);
    c.expect(a == b, "curate_test_set not seed-deterministic");
    std::map<char, int> per;
    for (const auto& id : a.case_ids) per[id[1]]++;
    c.expect(per == std::map<char, int>{{'0', 2}, {'1', 2}, {'2', 2}}, "strata not exact");
    return c.outcome("lobar atelectasis -> Atelectasis/Fibrotic band with boxes merged; survivors r01 r03 r05 r06 r07 "
                     "r09 r10; curate_test_set deterministic and 2/2/2 per stratum");
}

// ---- end-to-end study over HTTP ----

const std::set<std::string> kScoreKeys = {"grade",          "feedback",      "ground_truth", "ground_truth_findings",
                                          "crimson_percent", "style_percent", "errors",       "case_accuracy",
                                          "matched_findings", "accuracy",     "style"};
const std::set<std::string> kGradeKeys = {"grade", "feedback", "crimson_percent", "style_percent",
                                          "errors", "case_accuracy", "matched_findings", "accuracy", "style"};

bool has_any_key(const json& j, const std::set<std::string>& keys) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (keys.count(k) || has_any_key(v, keys)) return true;
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (has_any_key(v, keys)) return true;
        }
    }
    return false;
}

const std::string kWrongReport = "No acute cardiopulmonary abnormality.";
const std::string kOperatorToken = "acceptance-operator";

json crimson_fixture(const ReportCase& c, bool correct) {
    json errors{{"a", json::array()}, {"b", json::array()}, {"c", json::array()}, {"d", json::array()}};
    json matched = json::array();
    if (correct) {
        matched.push_back(c.reference_findings);
    } else {
        errors["b"].push_back("Missed: " + c.reference_findings);
    }
    return {{"Explanation", correct ? "Candidate matches the reference." : "Candidate omits the reference finding."},
            {"ClinicallySignificantErrors", errors},
            {"MatchedFindings", matched}};
}

json style_fixture(bool correct) {
    return {{"systematic_evaluation_score", 1},
            {"organization_language_score", correct ? 1.0 : 0.5},
            {"systematic_evaluation_recommendation", ""},
            {"organization_language_recommendation", correct ? "" : "State the pertinent negatives."}};
}

std::string judge_digest(const std::string& prompt) {
    GatewayRequest req;
    req.role = ModelRole::judge;
    req.prompt = prompt;
    return request_digest(req);
}

// Judge answers are keyed only by request digest; anything else errors.
json stub_fixtures(const std::vector<ReportCase>& cases) {
    json responses = json::object();
    for (const auto& c : cases) {
        for (bool correct : {true, false}) {
            const std::string cand = correct ? c.reference_findings : kWrongReport;
            responses[judge_digest(build_crimson_prompt(c.age_years, c.indication, c.reference_findings, cand))] =
                crimson_fixture(c, correct).dump();
            responses[judge_digest(build_style_prompt(cand))] = style_fixture(correct).dump();
        }
    }
    const auto taxonomy = TaxonomyConfig::default_taxonomy();
    for (const auto& f : taxonomy.classes()) {
        const bool draw = f.mode == FindingMode::draw;
        responses[std::string(draw ? "explain_draw:" : "explain_select:") + f.id] =
            "The " + f.display_name + " is visible as a focal change in the marked region.";
    }
    return {{"fallback", "error"}, {"responses", responses}};
}

struct StudyRun {
    Checks checks;
    std::string outcomes_csv;
    std::string improvements;
    std::string live_snapshot;
    std::string replay_snapshot;
    std::size_t events = 0;
    std::size_t responses = 0;
    double seconds = 0.0;
};

class HttpDriver {
public:
    HttpDriver(int port) : client_("127.0.0.1", port) { client_.set_read_timeout(30, 0); }

    std::pair<int, json> call(const std::string& method, const std::string& path, const json& body,
                              const std::string& token) {
        httplib::Headers h{{"Authorization", "Bearer " + token}};
        const std::string url = std::string(kApiPrefix) + path;
        auto res = method == "GET" ? client_.Get(url.c_str(), h)
                                   : client_.Post(url.c_str(), h, body.dump(), "application/json");
        if (!res) throw Error(ErrorCode::transport_error, "no response from " + url);
        return {res->status, res->body.empty() ? json() : json::parse(res->body)};
    }

    bool wait_ready() {
        for (int k = 0; k < 200; ++k) {
            if (client_.Get((std::string(kApiPrefix) + "/healthz").c_str())) return true;
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        return false;
    }

private:
    httplib::Client client_;
};

StudyRun run_study(const std::string& tag) {
    StudyRun run;
    auto& c = run.checks;
    const auto t0 = std::chrono::steady_clock::now();

    testing::SyntheticStudy fixture({5, 10, 5}, {3, 6, 3}, 5, tag);
    const auto& dir = fixture.dir;
    write_localize_cases(dir / "localize.jsonl", fixture.data.localize_cases);
    write_report_cases(dir / "report.jsonl", fixture.data.report_cases);
    write_text_file(dir / "stub.json", stub_fixtures(fixture.data.report_cases).dump(2));
    const json config = {
        {"datasets", {{"localize", "localize.jsonl"}, {"report", "report.jsonl"}, {"image_root", "."}}},
        {"gateway", {{"mode", "stub"}, {"fixtures", "stub.json"}}},
        {"phase_sizes",
         {{"localize", {{"pretest", 5}, {"learning", 10}, {"posttest", 5}}},
          {"report", {{"pretest", 3}, {"learning", 6}, {"posttest", 3}}}}},
        {"store_dir", "store"},
        {"curation_seed", 7},
        {"bind", {{"host", "127.0.0.1"}, {"port", 0}}}};
    write_text_file(dir / "config.json", config.dump(2));

    const AppConfig cfg = AppConfig::load(dir / "config.json");
    c.expect(cfg.gateway_mode == GatewayMode::stub, "gateway not in stub mode");
    auto clock = std::make_shared<ManualStudyClock>();
    auto rt = open_study(cfg, clock);
    rt.engine->initialize(curate_plan(cfg, rt.engine->datasets()));

    ServerOptions options;
    options.host = cfg.host;
    options.port = cfg.port;
    options.operator_token = kOperatorToken;
    options.image_root = cfg.image_root;
    options.overlay_root = cfg.overlay_dir;
    options.sweep_interval_seconds = 0;
    ApiServer server(*rt.engine, options);
    const int port = server.bind();
    std::thread serving([&server] { server.run(); });
    struct Stop {
        ApiServer& s;
        std::thread& t;
        ~Stop() {
            s.stop();
            t.join();
        }
    } stop{server, serving};

    HttpDriver http(port);
    c.expect(http.wait_ready(), "server did not come up");

    std::vector<std::string> ids;
    std::map<std::string, std::string> tokens;
    for (int k = 1; k <= 6; ++k) {
        const std::string id = "p" + std::to_string(k);
        auto [st, body] = http.call("POST", "/participants", {{"participant_id", id}}, kOperatorToken);
        c.expect(st == 201, "enroll " + id + " -> " + std::to_string(st));
        tokens[id] = body.value("token", "");
        ids.push_back(id);
    }
    auto [ast, assigned] = http.call("POST", "/study/assign", {{"seed", 3}}, kOperatorToken);
    c.expect(ast == 200 && assigned["assignments"].size() == 6, "assignment failed");

    std::map<std::string, const ReportCase*> report_cases;
    for (const auto& rc : fixture.data.report_cases) report_cases[rc.case_id] = &rc;

    std::size_t graded = 0, recorded = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& pid = ids[i];
        const auto& token = tokens[pid];
        const auto assignment = rt.engine->assignment(pid);
        for (Module module : {Module::localize, Module::report}) {
            const Group group = assignment.group_for(module);
            for (Phase phase : {Phase::pretest, Phase::learning, Phase::posttest}) {
                const std::string where = pid + " " + std::string(to_string(module)) + " " + std::string(to_string(phase));
                auto [sst, started] = http.call(
                    "POST", "/session/" + pid + "/phase/start",
                    {{"phase", to_string(phase)}, {"module", to_string(module)}}, token);
                c.expect(sst == 200, where + ": start -> " + std::to_string(sst));
                if (sst != 200) break;
                for (std::size_t j = 0;; ++j) {
                    auto [nst, next] = http.call("GET", "/session/" + pid + "/case/next", json(), token);
                    c.expect(nst == 200, where + ": next -> " + std::to_string(nst));
                    if (nst != 200 || next["case"].is_null()) break;
                    if (phase != Phase::learning) c.expect(!has_any_key(next, kScoreKeys), where + ": score in case payload");
                    const auto case_id = next["case"]["case_id"].get<std::string>();
                    clock->advance(10.0 + static_cast<double>(i));

                    std::pair<int, json> res;
                    std::size_t expected_feedback = 0;  // one item per missed finding
                    if (module == Module::localize) {
                        const bool perfect = phase == Phase::pretest    ? j < 2
                                             : phase == Phase::learning ? j % 2 == 0
                                                                        : j < 2 + i % 4;
                        const auto& lc = fixture.localize_case(case_id);
                        const auto sub = perfect ? testing::perfect_submission(lc) : testing::empty_submission(case_id);
                        if (!perfect) expected_feedback = lc.annotations.size();
                        res = http.call("POST", "/session/" + pid + "/submit/localize", json(sub), token);
                    } else {
                        const bool correct = phase == Phase::pretest    ? j < 1
                                             : phase == Phase::learning ? j % 2 == 0
                                                                        : j < 1 + i % 3;
                        const auto& rc = *report_cases.at(case_id);
                        res = http.call("POST", "/session/" + pid + "/submit/report",
                                        {{"case_id", case_id}, {"candidate", correct ? rc.reference_findings : kWrongReport}},
                                        token);
                    }
                    ++run.responses;
                    const auto& [rst, body] = res;
                    c.expect(rst == 200, where + ": submit " + case_id + " -> " + std::to_string(rst) + " " + body.dump());
                    if (rst != 200) continue;
                    if (phase != Phase::learning) {
                        c.expect(!has_any_key(body, kScoreKeys), where + ": score field in test response");
                    } else if (group == Group::gamified) {
                        ++graded;
                        c.expect(body.value("status", "") == "graded", where + ": gamified response not graded");
                        if (module == Module::localize) {
                            c.expect(body.contains("grade") && body["grade"].is_object(), where + ": no grade");
                            c.expect(body.contains("feedback") && body["feedback"].is_array(), where + ": no feedback");
                            c.expect(body["feedback"].size() == expected_feedback, where + ": feedback count");
                        } else {
                            c.expect(body.contains("crimson_percent") && body.contains("style_percent") &&
                                         body.contains("errors"),
                                     where + ": no report grade");
                        }
                    } else {
                        ++recorded;
                        c.expect(body.contains(module == Module::localize ? "ground_truth" : "ground_truth_findings"),
                                 where + ": traditional response lacks ground truth");
                        c.expect(!has_any_key(body, kGradeKeys), where + ": traditional response carries a grade");
                    }
                }
            }
        }
        auto [sst, summary] = http.call("GET", "/session/" + pid, json(), token);
        c.expect(sst == 200 && summary["modules"]["localize"]["phase"] == "done" &&
                     summary["modules"]["report"]["phase"] == "done",
                 pid + " did not reach done");
    }
    c.expect(graded > 0 && recorded > 0, "learning responses not exercised for both groups");
    c.expect(rt.engine->pending_count() == 0, std::to_string(rt.engine->pending_count()) + " judge calls pending");

    export_outcomes(cfg.store_dir / "outcomes.csv", rt.engine->outcomes());
    run.outcomes_csv = read_text_file(cfg.store_dir / "outcomes.csv");
    const auto rows = import_outcomes(cfg.store_dir / "outcomes.csv");
    c.expect(rows.size() == 12, "expected 12 outcome rows, got " + std::to_string(rows.size()));
    for (const auto& m : summarize(rows)) {
        for (const auto& g : m.groups) {
            // recompute the group improvement from the exported rows
            double pre = 0, post = 0;
            std::size_t n = 0;
            for (const auto& r : rows) {
                if (r.module != g.module || r.group != g.group) continue;
                pre += r.pre_score;
                post += r.post_score;
                ++n;
            }
            c.expect(n == 3, "group size " + std::to_string(n));
            pre /= static_cast<double>(n);
            post /= static_cast<double>(n);
            c.expect(g.improvement.percent.has_value(), "improvement percent absent");
            if (g.improvement.percent) {
                c.expect(std::fabs(*g.improvement.percent - 100.0 * (post - pre) / pre) < 1e-9,
                         "improvement percent disagrees with exported rows");
                run.improvements += std::string(to_string(g.module)) + "/" + std::string(to_string(g.group)) + " " +
                                    fmt("%+.2f%%", *g.improvement.percent) + " ";
            }
        }
    }

    run.live_snapshot = rt.engine->snapshot().dump();
    run.events = read_event_log(cfg.events_path()).size();
    auto replayed = open_study(cfg, std::make_shared<ManualStudyClock>(0.0));
    run.replay_snapshot = replayed.engine->snapshot().dump();
    c.expect(read_event_log(cfg.events_path()).size() == run.events, "replay appended events");
    run.seconds = seconds_since(t0);
    return run;
}

}  // namespace

int main() {
    criterion("iou_engine", check_iou);
    criterion("threshold_semantics", check_threshold);
    criterion("crimson_formula", check_crimson);
    criterion("prompt_fidelity", check_prompts);
    criterion("style_score", check_style);
    criterion("statistics", check_statistics);
    criterion("ingest", check_ingest);

    std::optional<StudyRun> first;
    criterion("end_to_end_stubbed_study", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        first = run_study("accept_a");
        auto second = run_study("accept_b");
        Checks c = first->checks;
        for (const auto& p : second.checks.problems) c.expect(false, "second run: " + p);
        c.expect(first->outcomes_csv == second.outcomes_csv, "outcomes differ between identical runs");
        c.expect(first->improvements == second.improvements, "improvements differ between identical runs");
        const double secs = seconds_since(t0);
        c.expect(first->seconds < kStudyBudgetSeconds, "runtime " + fmt("%.1f", first->seconds) + " s");
        return c.outcome("6 participants done in both modules, " + std::to_string(first->responses) +
                         " submissions over HTTP, stub gateway; improvements " + first->improvements +
                         "identical across two runs; " + fmt("%.1f", first->seconds) + " s per run (" +
                         fmt("%.1f", secs) + " s total)");
    });
    criterion("event_log_replay", [&]() -> Outcome {
        if (!first) return {false, "end-to-end run did not complete"};
        const bool same = !first->live_snapshot.empty() && first->live_snapshot == first->replay_snapshot;
        return {same, std::to_string(first->events) + " events replayed; snapshot " +
                          std::to_string(first->live_snapshot.size()) + " bytes " +
                          (same ? "byte-identical" : "differs")};
    });

    std::printf("summary: %d criteria failed\n", failures);
    return failures ? 1 : 0;
}
