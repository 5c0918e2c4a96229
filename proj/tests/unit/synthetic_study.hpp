#pragma once

#include <memory>
#include <string>
#include <vector>

#include "radgame/feedback/image.hpp"
#include "radgame/gateway/stub.hpp"
#include "radgame/ingest/ingest.hpp"
#include "radgame/study/engine.hpp"
#include "test_support.hpp"

namespace radgame::testing {

// Small self-contained study: PNG images on disk, cases with 0-3 findings,
// and a plan curated from them.
struct SyntheticStudy {
    explicit SyntheticStudy(PhaseSizes localize_sizes = {2, 3, 2}, PhaseSizes report_sizes = {2, 3, 2},
                            std::uint64_t seed = 5, const std::string& tag = "study")
        : dir(tag) {
        const std::vector<std::string> draw = {"nodule_mass", "consolidation", "fracture", "tube"};
        const std::vector<std::string> select = {"cardiomegaly", "pleural_effusion"};
        const std::size_t n_localize = localize_sizes.pretest + localize_sizes.learning + 4;
        for (std::size_t k = 0; k < n_localize; ++k) {
            LocalizeCase c;
            c.case_id = "L" + std::to_string(100 + k);
            c.image_ref = c.case_id + ".png";
            c.image_width_px = 64;
            c.image_height_px = 48;
            const std::size_t findings = k % 4;
            for (std::size_t f = 0; f < findings; ++f) {
                if (f == 2) {
                    c.annotations.push_back({select[k % 2], {}, true});
                    continue;
                }
                const auto& id = draw[(k + f) % draw.size()];
                const double x = 0.1 + 0.4 * static_cast<double>(f);
                c.annotations.push_back({id, {{x, 0.2, x + 0.3, 0.6}}, true});
            }
            save_png(dir / c.image_ref, Image(64, 48, Rgba{30, 30, 30, 255}));
            data.localize_cases.push_back(c);
        }
        const std::vector<std::string> findings = {"Right lower lobe consolidation.", "Small left pleural effusion.",
                                                   "Cardiomegaly. Clear lungs.", "Left apical pneumothorax.",
                                                   "Normal study."};
        const std::size_t n_report = report_sizes.pretest + report_sizes.learning + 3;
        for (std::size_t k = 0; k < n_report; ++k) {
            ReportCase c;
            c.case_id = "R" + std::to_string(100 + k);
            c.image_refs = {c.case_id + "_pa.png"};
            c.age_years = 30 + static_cast<int>(k) * 3;
            c.indication = k % 2 ? "Cough" : "Chest pain";
            c.reference_findings = findings[k % findings.size()];
            c.priors_excluded = true;
            data.report_cases.push_back(c);
        }
        plan.localize = curate_study_sets(data.localize_cases, localize_sizes, seed);
        plan.report = curate_study_sets(data.report_cases, report_sizes, seed + 1);
    }

    EngineOptions options() const {
        EngineOptions o;
        o.feedback.image_root = dir.path();
        o.feedback.overlay_root = dir / "overlays";
        return o;
    }

    const LocalizeCase& localize_case(const std::string& id) const {
        for (const auto& c : data.localize_cases) {
            if (c.case_id == id) return c;
        }
        throw Error(ErrorCode::not_found, id);
    }

    TempDir dir;
    StudyDatasets data;
    StudyPlan plan;
};

// Submission that reproduces the ground truth, so it scores 1.
inline LocalizeSubmission perfect_submission(const LocalizeCase& c) {
    LocalizeSubmission s;
    s.case_id = c.case_id;
    for (const auto& a : c.annotations) s.entries.push_back({a.class_id, true, a.boxes});
    return s;
}

inline LocalizeSubmission empty_submission(const std::string& case_id) {
    LocalizeSubmission s;
    s.case_id = case_id;
    return s;
}

// Judge gateway whose style answers are perfect and whose CRIMSON answers
// report `matched` findings and `missing` category-b errors.
inline std::shared_ptr<StubRegistry> judge_registry(const std::vector<ReportCase>& cases, int matched, int missing) {
    auto reg = std::make_shared<StubRegistry>();
    for (const auto& c : cases) {
        json errors{{"a", json::array()}, {"b", json::array()}, {"c", json::array()}, {"d", json::array()}};
        for (int k = 0; k < missing; ++k) errors["b"].push_back("missed finding " + std::to_string(k));
        json matched_list = json::array();
        for (int k = 0; k < matched; ++k) matched_list.push_back("finding " + std::to_string(k));
        reg->add("crimson:" + c.case_id,
                 json{{"Explanation", "synthetic"}, {"ClinicallySignificantErrors", errors}, {"MatchedFindings", matched_list}}
                     .dump());
        reg->add("style:" + c.case_id, json{{"systematic_evaluation_score", 1},
                                            {"organization_language_score", 0.5},
                                            {"systematic_evaluation_recommendation", ""},
                                            {"organization_language_recommendation", "Group related findings."}}
                                           .dump());
    }
    reg->set_fallback(StubFallback::no_findings);  // explainer requests
    return reg;
}

inline std::unique_ptr<Gateway> stub_gateway(std::shared_ptr<StubRegistry> reg) {
    return std::make_unique<Gateway>(
        std::vector<ModelEndpointConfig>{default_endpoint(ModelRole::judge), default_endpoint(ModelRole::explainer)},
        std::make_shared<StubTransport>(std::move(reg)));
}

}  // namespace radgame::testing
