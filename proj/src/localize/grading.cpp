#include <map>
#include <set>

#include "radgame/core/error.hpp"
#include "radgame/localize/grading.hpp"

namespace radgame {

std::string_view to_string(ClassOutcome outcome) {
    switch (outcome) {
        case ClassOutcome::credited: return "credited";
        case ClassOutcome::missed: return "missed";
        case ClassOutcome::wrong_location: return "wrong_location";
        case ClassOutcome::false_positive: return "false_positive";
        case ClassOutcome::true_negative: return "true_negative";
    }
    return "true_negative";
}

ClassOutcome parse_class_outcome(std::string_view text) {
    for (auto o : {ClassOutcome::credited, ClassOutcome::missed, ClassOutcome::wrong_location,
                   ClassOutcome::false_positive, ClassOutcome::true_negative}) {
        if (to_string(o) == text) return o;
    }
    throw Error(ErrorCode::invalid_argument, "unknown class outcome '" + std::string(text) + "'");
}

std::optional<std::string> validate_submission(const LocalizeSubmission& s, const TaxonomyConfig& taxonomy) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        const auto& e = s.entries[i];
        const std::string path = "entries[" + std::to_string(i) + "]";
        const auto* cls = taxonomy.find(e.class_id);
        if (!cls) return path + ".class_id: unknown class '" + e.class_id + "'";
        if (!seen.insert(e.class_id).second) return path + ".class_id: duplicate entry for '" + e.class_id + "'";
        if (!e.boxes.empty() && cls->mode == FindingMode::select) {
            return path + ".boxes: Select finding '" + e.class_id + "' cannot carry boxes";
        }
        if (!e.boxes.empty() && !e.asserted) return path + ".asserted: boxes require asserted=true";
        for (std::size_t b = 0; b < e.boxes.size(); ++b) {
            if (auto v = validate_box(e.boxes[b])) return path + ".boxes[" + std::to_string(b) + "]: " + *v;
        }
    }
    if (s.elapsed_seconds < 0.0) return std::string("elapsed_seconds: must be >= 0");
    return std::nullopt;
}

const ClassResult* LocalizeCaseResult::find(std::string_view class_id) const {
    for (const auto& c : classes) {
        if (c.class_id == class_id) return &c;
    }
    return nullptr;
}

LocalizeCaseResult grade_case(const LocalizeSubmission& submission, const LocalizeCase& c,
                              const TaxonomyConfig& taxonomy, double threshold) {
    if (submission.case_id != c.case_id) {
        throw Error(ErrorCode::wrong_case,
                    "submission for '" + submission.case_id + "' graded against case '" + c.case_id + "'");
    }
    if (auto violation = validate_submission(submission, taxonomy)) {
        const auto code = violation->find("unknown class") != std::string::npos ? ErrorCode::unknown_class
                                                                                : ErrorCode::schema_violation;
        throw Error(code, "invalid localize submission: " + *violation, *violation);
    }
    for (const auto& a : c.annotations) taxonomy.at(a.class_id);

    std::map<std::string, const SubmissionEntry*, std::less<>> entries;
    for (const auto& e : submission.entries) entries[e.class_id] = &e;

    LocalizeCaseResult result;
    result.case_id = c.case_id;
    std::size_t gt_classes = 0;
    for (const auto& cls : taxonomy.classes()) {
        ClassResult r;
        r.class_id = cls.id;
        r.mode = cls.mode;
        const FindingAnnotation* gt = c.find(cls.id);
        auto it = entries.find(cls.id);
        const SubmissionEntry* entry = it == entries.end() ? nullptr : it->second;
        const bool asserted = entry && entry->asserted;

        if (!gt) {
            r.outcome = asserted ? ClassOutcome::false_positive : ClassOutcome::true_negative;
            if (asserted) {
                for (std::size_t u = 0; u < entry->boxes.size(); ++u) r.unmatched_user.push_back(u);
            }
        } else {
            ++gt_classes;
            if (cls.mode == FindingMode::select) {
                r.outcome = asserted ? ClassOutcome::credited : ClassOutcome::missed;
            } else if (!asserted) {
                r.outcome = ClassOutcome::missed;
                for (std::size_t g = 0; g < gt->boxes.size(); ++g) r.unmatched_gt.push_back(g);
            } else {
                auto draw = grade_draw(entry->boxes, gt->boxes, threshold);
                r.outcome = draw.credited ? ClassOutcome::credited : ClassOutcome::wrong_location;
                r.pairs = std::move(draw.pairs);
                r.unmatched_gt = std::move(draw.missed_gt_indices);
                r.unmatched_user = std::move(draw.spurious_user_indices);
            }
        }
        switch (r.outcome) {
            case ClassOutcome::credited: ++result.true_positives; break;
            case ClassOutcome::missed:
            case ClassOutcome::wrong_location: ++result.false_negatives; break;
            case ClassOutcome::false_positive: ++result.false_positives; break;
            case ClassOutcome::true_negative: break;
        }
        result.classes.push_back(std::move(r));
    }

    const auto denom = result.true_positives + result.false_negatives + result.false_positives;
    result.case_accuracy = denom == 0 ? 1.0 : static_cast<double>(result.true_positives) / denom;
    result.recall = gt_classes == 0 ? 1.0 : static_cast<double>(result.true_positives) / gt_classes;
    return result;
}

void to_json(json& j, const BoxMatch& m) {
    j = json{{"user_index", m.user_index}, {"gt_index", m.gt_index}, {"iou", m.iou}};
}

void from_json(const json& j, BoxMatch& m) {
    m.user_index = require_field<std::size_t>(j, "user_index");
    m.gt_index = require_field<std::size_t>(j, "gt_index");
    m.iou = require_field<double>(j, "iou");
}

void to_json(json& j, const SubmissionEntry& e) {
    j = json{{"class_id", e.class_id}, {"asserted", e.asserted}, {"boxes", e.boxes}};
}

void from_json(const json& j, SubmissionEntry& e) {
    e.class_id = require_field<std::string>(j, "class_id");
    e.boxes = j.value("boxes", std::vector<BoundingBox>{});
    // A box implies assertion unless stated otherwise.
    e.asserted = j.value("asserted", !e.boxes.empty());
}

void to_json(json& j, const LocalizeSubmission& s) {
    j = json{{"case_id", s.case_id}, {"entries", s.entries}, {"elapsed_seconds", s.elapsed_seconds}};
}

void from_json(const json& j, LocalizeSubmission& s) {
    s.case_id = require_field<std::string>(j, "case_id");
    s.entries = j.value("entries", std::vector<SubmissionEntry>{});
    s.elapsed_seconds = j.value("elapsed_seconds", 0.0);
}

void to_json(json& j, const ClassResult& r) {
    j = json{{"class_id", r.class_id},
             {"mode", to_string(r.mode)},
             {"outcome", to_string(r.outcome)},
             {"pairs", r.pairs},
             {"unmatched_gt", r.unmatched_gt},
             {"unmatched_user", r.unmatched_user}};
}

void from_json(const json& j, ClassResult& r) {
    r.class_id = require_field<std::string>(j, "class_id");
    r.mode = parse_finding_mode(require_field<std::string>(j, "mode"));
    r.outcome = parse_class_outcome(require_field<std::string>(j, "outcome"));
    r.pairs = j.value("pairs", std::vector<BoxMatch>{});
    r.unmatched_gt = j.value("unmatched_gt", std::vector<std::size_t>{});
    r.unmatched_user = j.value("unmatched_user", std::vector<std::size_t>{});
}

void to_json(json& j, const LocalizeCaseResult& r) {
    j = json{{"case_id", r.case_id},
             {"classes", r.classes},
             {"true_positives", r.true_positives},
             {"false_negatives", r.false_negatives},
             {"false_positives", r.false_positives},
             {"case_accuracy", r.case_accuracy},
             {"recall", r.recall}};
}

void from_json(const json& j, LocalizeCaseResult& r) {
    r.case_id = require_field<std::string>(j, "case_id");
    r.classes = require_field<std::vector<ClassResult>>(j, "classes");
    r.true_positives = require_field<std::size_t>(j, "true_positives");
    r.false_negatives = require_field<std::size_t>(j, "false_negatives");
    r.false_positives = require_field<std::size_t>(j, "false_positives");
    r.case_accuracy = require_field<double>(j, "case_accuracy");
    r.recall = require_field<double>(j, "recall");
}

}  // namespace radgame
