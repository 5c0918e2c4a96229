#include <doctest.h>

#include <map>
#include <algorithm>
#include <set>

#include "radgame/core/error.hpp"
#include "radgame/ingest/ingest.hpp"
#include "radgame/ingest/taxonomy.hpp"
#include "test_support.hpp"

using namespace radgame;

namespace {

LocalizeCase make_case(const std::string& id, int findings) {
    static const std::vector<std::string> draw = {"nodule_mass", "consolidation", "fracture", "tube"};
    LocalizeCase c;
    c.case_id = id;
    c.image_ref = id + ".png";
    c.image_width_px = 100;
    c.image_height_px = 100;
    for (int k = 0; k < findings; ++k) c.annotations.push_back({draw[k], {{0.1, 0.1, 0.4, 0.4}}, true});
    return c;
}

}  // namespace

TEST_CASE("default taxonomy has 16 Draw and 6 Select classes") {
    const auto t = TaxonomyConfig::default_taxonomy();
    CHECK(t.is_default());
    CHECK(t.by_mode(FindingMode::draw).size() == 16);
    CHECK(t.by_mode(FindingMode::select).size() == 6);
    CHECK(t.at("atelectasis_fibrotic_band").display_name == "Atelectasis/Fibrotic band");
    CHECK(t.at("pleural_effusion").mode == FindingMode::select);
    CHECK_THROWS_AS(t.at("nope"), Error);
}

TEST_CASE("label resolution ignores case and whitespace") {
    const auto t = TaxonomyConfig::default_taxonomy();
    REQUIRE(t.resolve("  Lobar   ATELECTASIS ") != nullptr);
    CHECK(t.resolve("lobar atelectasis")->id == "atelectasis_fibrotic_band");
    CHECK(t.resolve("Atelectasis/Fibrotic band")->id == "atelectasis_fibrotic_band");
    CHECK(t.resolve("nodule_mass")->id == "nodule_mass");
    CHECK(t.resolve("unicorn") == nullptr);
    CHECK(normalize_label("  A\tB  c ") == "a b c");
}

TEST_CASE("interstitial taxonomy swaps in the subtype classes") {
    const auto t = TaxonomyConfig::interstitial_taxonomy();
    CHECK_FALSE(t.is_default());
    CHECK(t.classes().size() == 3);
    CHECK(t.find("reticular_kerley_b") != nullptr);
    for (const auto& c : t.classes()) CHECK(c.mode == FindingMode::draw);
}

TEST_CASE("taxonomy construction rejects duplicates and alias collisions") {
    std::vector<FindingClass> dup = {{"a", "A", FindingMode::draw, {}}, {"a", "A2", FindingMode::draw, {}}};
    CHECK_THROWS_AS(TaxonomyConfig("t", dup), Error);
    std::vector<FindingClass> clash = {{"a", "A", FindingMode::draw, {"shadow"}},
                                       {"b", "B", FindingMode::select, {"Shadow "}}};
    try {
        TaxonomyConfig("t", clash);
        FAIL("expected alias collision");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::alias_collision);
    }
    const auto round = TaxonomyConfig::from_json(TaxonomyConfig::default_taxonomy().to_json());
    CHECK(round.classes() == TaxonomyConfig::default_taxonomy().classes());
}

TEST_CASE("consolidation fixture maps aliases and merges same-class boxes") {
    const auto rows = read_source_rows(testing::fixture("localize_consolidation.csv"));
    REQUIRE(rows.size() == 5);
    const auto result = load_localize_dataset(rows, TaxonomyConfig::default_taxonomy(), BoxUnits::pixel);
    CHECK(result.report.rows_read == 5);
    CHECK(result.report.rows_accepted == 5);
    CHECK(result.report.unmapped_labels.empty());
    CHECK(result.report.rejected_rows.empty());
    REQUIRE(result.cases.size() == 3);

    const auto& c1 = result.cases[0];
    CHECK(c1.case_id == "c001");
    REQUIRE(c1.annotations.size() == 2);
    const auto* atel = c1.find("atelectasis_fibrotic_band");
    REQUIRE(atel != nullptr);
    REQUIRE(atel->boxes.size() == 2);
    CHECK(atel->boxes[0].x_min == doctest::Approx(0.1));
    CHECK(atel->boxes[0].y_max == doctest::Approx(0.3));
    CHECK(atel->boxes[1].x_min == doctest::Approx(0.5));
    const auto* cardio = c1.find("cardiomegaly");
    REQUIRE(cardio != nullptr);
    CHECK(cardio->boxes.empty());

    CHECK(result.cases[1].find("nodule_mass") != nullptr);
    CHECK(result.cases[2].case_id == "c003");
    CHECK(result.cases[2].annotations.empty());
}

TEST_CASE("ingest reports unmapped labels, rejects boxless Draw rows and clamps") {
    std::vector<json> rows = {
        {{"case_id", "a"}, {"image_ref", "a.png"}, {"image_width_px", 100}, {"image_height_px", 100},
         {"label", "dragon"}, {"x_min", 1}, {"y_min", 1}, {"x_max", 5}, {"y_max", 5}},
        {{"case_id", "a"}, {"image_ref", "a.png"}, {"image_width_px", 100}, {"image_height_px", 100},
         {"label", "nodule"}},
        {{"case_id", "a"}, {"image_ref", "a.png"}, {"image_width_px", 100}, {"image_height_px", 100},
         {"label", "fracture"}, {"x_min", -5}, {"y_min", 10}, {"x_max", 50}, {"y_max", 120}},
    };
    const auto r = load_localize_dataset(rows, TaxonomyConfig::default_taxonomy(), BoxUnits::pixel);
    REQUIRE(r.report.unmapped_labels.size() == 1);
    CHECK(r.report.unmapped_labels[0].detail == "dragon");
    CHECK(r.report.rejected_rows.size() == 1);
    CHECK(r.report.clamped_boxes.size() == 1);
    REQUIRE(r.cases.size() == 1);
    const auto* f = r.cases[0].find("fracture");
    REQUIRE(f != nullptr);
    CHECK(f->boxes[0].x_min == 0.0);
    CHECK(f->boxes[0].y_max == 1.0);
}

TEST_CASE("prior-exclusion fixture keeps exactly the seven hand-labeled survivors") {
    const auto rows = read_source_rows(testing::fixture("report_priors.jsonl"));
    REQUIRE(rows.size() == 10);
    const auto result = load_report_dataset(rows);
    std::vector<std::string> kept;
    for (const auto& c : result.cases) kept.push_back(c.case_id);
    const std::vector<std::string> expected = {"r01", "r03", "r05", "r06", "r07", "r09", "r10"};
    CHECK(kept == expected);
    CHECK(result.report.excluded.size() == 3);
    std::set<std::string> excluded;
    for (const auto& e : result.report.excluded) excluded.insert(e.case_id);
    CHECK(excluded == std::set<std::string>{"r02", "r04", "r08"});
    for (const auto& c : result.cases) CHECK(c.priors_excluded);
    CHECK(result.cases[1].image_refs.size() == 2);
}

TEST_CASE("report rows accept alternate field names and separated image refs") {
    std::vector<json> rows = {{{"study_id", "s1"}, {"image_refs", "a.png; b.png"}, {"age", "61"},
                               {"indication", "cough"}, {"findings", "Small left effusion."}},
                              {{"study_id", "s2"}, {"age", 40}, {"indication", "x"}}};
    const auto r = load_report_dataset(rows);
    REQUIRE(r.cases.size() == 1);
    CHECK(r.cases[0].image_refs == std::vector<std::string>{"a.png", "b.png"});
    CHECK(r.cases[0].age_years == 61);
    CHECK(r.report.rejected.size() == 1);
}

TEST_CASE("prior detector matches case-insensitively") {
    PriorDetector d;
    CHECK(d.match("Stable COMPARED TO the last exam").has_value());
    CHECK_FALSE(d.match("Right basal consolidation.").has_value());
    PriorDetector custom({"old film"});
    CHECK(custom.match("see OLD FILM").has_value());
    CHECK_FALSE(custom.match("compared to prior").has_value());
}

TEST_CASE("stratified sampling is exact on a divisible pool") {
    std::vector<LocalizeCase> cases;
    for (int d = 0; d < 3; ++d) {
        for (int k = 0; k < 4; ++k) cases.push_back(make_case("d" + std::to_string(d) + "_" + std::to_string(k), d));
    }
    const auto a = curate_test_set(cases, 6, 11);
    const auto b = curate_test_set(cases, 6, 11);
    CHECK(a == b);
    REQUIRE(a.case_ids.size() == 6);
    std::map<int, int> per_stratum;
    for (const auto& id : a.case_ids) per_stratum[id[1] - '0']++;
    CHECK(per_stratum == std::map<int, int>{{0, 2}, {1, 2}, {2, 2}});
    CHECK(std::set<std::string>(a.case_ids.begin(), a.case_ids.end()).size() == 6);

    bool differs = false;
    for (std::uint64_t s = 12; s < 20 && !differs; ++s) differs = curate_test_set(cases, 6, s).case_ids != a.case_ids;
    CHECK(differs);
    CHECK_THROWS_AS(curate_test_set(cases, 13, 1), Error);
}

TEST_CASE("small strata spill their share to the others") {
    std::vector<StratumItem> pool = {{"x0", 0}};
    for (int k = 0; k < 5; ++k) pool.push_back({"y" + std::to_string(k), 1});
    for (int k = 0; k < 5; ++k) pool.push_back({"z" + std::to_string(k), 2});
    const auto picked = stratified_sample(pool, 7, 3);
    REQUIRE(picked.size() == 7);
    int x = 0, y = 0, z = 0;
    for (const auto& id : picked) (id[0] == 'x' ? x : id[0] == 'y' ? y : z)++;
    CHECK(x == 1);
    CHECK(y == 3);
    CHECK(z == 3);
}

TEST_CASE("study sets: learning disjoint from test, posttest equals pretest") {
    std::vector<LocalizeCase> cases;
    for (int k = 0; k < 30; ++k) cases.push_back(make_case("c" + std::to_string(k), k % 3));
    const auto sets = curate_study_sets(cases, {5, 10, 5}, 4);
    CHECK(sets.pretest.case_ids.size() == 5);
    CHECK(sets.learning.case_ids.size() == 10);
    CHECK(sets.posttest.case_ids == sets.pretest.case_ids);
    CHECK(sets.pretest.purpose == Purpose::pretest);
    CHECK(sets.posttest.purpose == Purpose::posttest);
    for (const auto& id : sets.learning.case_ids) {
        CHECK(std::find(sets.pretest.case_ids.begin(), sets.pretest.case_ids.end(), id) == sets.pretest.case_ids.end());
    }
    CHECK_THROWS_AS(curate_study_sets(cases, {5, 10, 4}, 4), Error);
    const json j = sets.learning;
    CHECK(j.get<CuratedSet>() == sets.learning);
}

TEST_CASE("default phase sizes") {
    CHECK(default_phase_sizes(Module::localize) == PhaseSizes{25, 375, 25});
    CHECK(default_phase_sizes(Module::report) == PhaseSizes{10, 150, 10});
}

TEST_CASE("report difficulty counts positive statements") {
    ReportCase c;
    c.reference_findings = "Right lower lobe consolidation. No pleural effusion. Cardiomegaly.";
    CHECK(report_difficulty(c) == 2);
    c.reference_findings = "Normal heart size. Clear lungs.";
    CHECK(report_difficulty(c) == 0);
}

TEST_CASE("case distribution export counts classes and difficulty") {
    std::vector<LocalizeCase> cases = {make_case("a", 0), make_case("b", 2), make_case("c", 2)};
    cases[1].annotations.push_back({"cardiomegaly", {}, true});
    const auto d = case_distribution(cases, TaxonomyConfig::default_taxonomy());
    CHECK(d.difficulty_histogram.at(0) == 1);
    CHECK(d.difficulty_histogram.at(2) == 1);
    CHECK(d.difficulty_histogram.at(3) == 1);
    CHECK(d.draw_counts.at("nodule_mass") == 2);
    CHECK(d.select_counts.at("cardiomegaly") == 1);
    CHECK(d.to_json().contains("draw_counts"));
}
