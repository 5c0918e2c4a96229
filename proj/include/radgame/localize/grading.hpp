#pragma once

#include <optional>
#include <string>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"
#include "radgame/ingest/taxonomy.hpp"

namespace radgame {

inline constexpr double kDefaultIouThreshold = 0.25;

/// Intersection over union of two valid boxes, computed from the rectangle
/// coordinates. Disjoint boxes give 0. Throws Error(invalid_box).
double iou(const BoundingBox& a, const BoundingBox& b);

struct BoxMatch {
    std::size_t user_index = 0;
    std::size_t gt_index = 0;
    double iou = 0.0;

    friend bool operator==(const BoxMatch&, const BoxMatch&) = default;
};

struct DrawGrade {
    bool credited = false;
    std::vector<BoxMatch> pairs;
    std::vector<std::size_t> missed_gt_indices;
    std::vector<std::size_t> spurious_user_indices;

    friend bool operator==(const DrawGrade&, const DrawGrade&) = default;
};

// Greedy one-to-one matching by descending IoU; a pair counts only when its
// IoU strictly exceeds `threshold`. Ties in IoU resolve to the lower
// (gt, user) index so the result is reproducible.
DrawGrade grade_draw(const std::vector<BoundingBox>& user_boxes, const std::vector<BoundingBox>& gt_boxes,
                     double threshold = kDefaultIouThreshold);

struct SubmissionEntry {
    std::string class_id;
    bool asserted = false;
    std::vector<BoundingBox> boxes;

    friend bool operator==(const SubmissionEntry&, const SubmissionEntry&) = default;
};

struct LocalizeSubmission {
    std::string case_id;
    std::vector<SubmissionEntry> entries;
    double elapsed_seconds = 0.0;

    friend bool operator==(const LocalizeSubmission&, const LocalizeSubmission&) = default;
};

// Violations are reported with a field path, e.g. "entries[1].boxes[0]: x_min < x_max".
std::optional<std::string> validate_submission(const LocalizeSubmission& s, const TaxonomyConfig& taxonomy);

enum class ClassOutcome { credited, missed, wrong_location, false_positive, true_negative };

std::string_view to_string(ClassOutcome outcome);
ClassOutcome parse_class_outcome(std::string_view text);

struct ClassResult {
    std::string class_id;
    FindingMode mode = FindingMode::draw;
    ClassOutcome outcome = ClassOutcome::true_negative;
    std::vector<BoxMatch> pairs;                // Draw classes only
    std::vector<std::size_t> unmatched_gt;      // indices into the GT boxes
    std::vector<std::size_t> unmatched_user;

    friend bool operator==(const ClassResult&, const ClassResult&) = default;
};

struct LocalizeCaseResult {
    std::string case_id;
    std::vector<ClassResult> classes;  // taxonomy order
    std::size_t true_positives = 0;
    std::size_t false_negatives = 0;   // missed + wrong_location
    std::size_t false_positives = 0;
    double case_accuracy = 1.0;        // TP / (TP + FN + FP), empty denominator -> 1
    double recall = 1.0;               // TP / GT classes, no GT -> 1

    const ClassResult* find(std::string_view class_id) const;
    friend bool operator==(const LocalizeCaseResult&, const LocalizeCaseResult&) = default;
};

// Throws Error(wrong_case) on case mismatch, Error(unknown_class) when the
// submission or case names a class outside the taxonomy, and
// Error(schema_violation) for structurally invalid submissions.
LocalizeCaseResult grade_case(const LocalizeSubmission& submission, const LocalizeCase& c,
                              const TaxonomyConfig& taxonomy, double threshold = kDefaultIouThreshold);

void to_json(json& j, const BoxMatch& m);
void from_json(const json& j, BoxMatch& m);
void to_json(json& j, const SubmissionEntry& e);
void from_json(const json& j, SubmissionEntry& e);
void to_json(json& j, const LocalizeSubmission& s);
void from_json(const json& j, LocalizeSubmission& s);
void to_json(json& j, const ClassResult& r);
void from_json(const json& j, ClassResult& r);
void to_json(json& j, const LocalizeCaseResult& r);
void from_json(const json& j, LocalizeCaseResult& r);

}  // namespace radgame
