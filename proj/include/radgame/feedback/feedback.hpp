#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"
#include "radgame/feedback/image.hpp"
#include "radgame/gateway/gateway.hpp"
#include "radgame/ingest/taxonomy.hpp"
#include "radgame/localize/grading.hpp"

namespace radgame {

struct OverlayStyle {
    Rgba color{255, 215, 0, 255};
    int thickness_px = 3;
};

// Rectangle outlines at the denormalized box edges (x * width rounded to the
// nearest pixel, clamped to the raster), growing inward by thickness_px. All
// other pixels are copied unchanged.
Image render_overlay(const Image& image, const std::vector<BoundingBox>& boxes, const OverlayStyle& style = {});

struct PixelRect {
    int x0, y0, x1, y1;  // inclusive
};
PixelRect to_pixels(const BoundingBox& box, int width, int height);

enum class FeedbackKind { draw_missed, draw_wrong_location, select_missed };
enum class FeedbackSource { model, fixture };

std::string_view to_string(FeedbackKind kind);
std::string_view to_string(FeedbackSource source);
FeedbackKind parse_feedback_kind(std::string_view text);
FeedbackSource parse_feedback_source(std::string_view text);

struct FeedbackItem {
    std::string item_id;  // "{case_id}.{class_id}" unless a caller scopes it further
    std::string case_id;
    std::string class_id;
    std::string display_name;
    FeedbackKind kind = FeedbackKind::select_missed;
    std::optional<std::string> overlay_image_ref;  // draw kinds only
    bool overlay_rendered = false;
    std::vector<BoundingBox> ground_truth_boxes;
    std::string explanation_text;
    FeedbackSource source = FeedbackSource::model;

    friend bool operator==(const FeedbackItem&, const FeedbackItem&) = default;
};

void to_json(json& j, const FeedbackItem& f);
void from_json(const json& j, FeedbackItem& f);

struct FeedbackOptions {
    std::filesystem::path image_root;     // image_ref is resolved against this
    std::filesystem::path overlay_root;   // empty: write beside the case image
    bool overlay_all_classes = false;     // default overlays only the missed class
    OverlayStyle style;
};

// Static per-class descriptions used when the explainer is unavailable.
std::string fallback_description(const FindingClass& cls);

std::string build_draw_explainer_prompt(const FindingClass& cls);
std::string build_select_explainer_prompt(const FindingClass& cls);

// Overlay file name: {case_id}.{class_id}.overlay.png
std::string overlay_file_name(const std::string& case_id, const std::string& class_id);

/// Feedback for a Draw finding the trainee missed or mislocated. Renders the
/// ground-truth overlay, asks the explainer for a two-sentence description
/// with the annotated image attached, and stores the reply verbatim. If the
/// gateway fails, the static fallback text is used and source = fixture. If
/// the case image cannot be decoded, overlay_rendered is false and the
/// explainer is not called.
FeedbackItem make_draw_feedback(const LocalizeCase& c, const FindingClass& cls, Gateway* gateway,
                                const FeedbackOptions& options, FeedbackKind kind = FeedbackKind::draw_missed);

FeedbackItem make_select_feedback(const std::string& case_id, const FindingClass& cls, Gateway* gateway);

// Feedback for every missed or mislocated finding of a graded case, in
// taxonomy order. Explainer calls run concurrently; the gateway bounds them.
std::vector<FeedbackItem> generate_feedback(const LocalizeCase& c, const LocalizeCaseResult& result,
                                            const TaxonomyConfig& taxonomy, Gateway* gateway,
                                            const FeedbackOptions& options);

struct FeedbackReview {
    std::string feedback_item_ref;
    std::string reviewer;
    int location_correct = 0;
    int visual_features_correct = 0;
    int subtype_correct = 0;

    friend bool operator==(const FeedbackReview&, const FeedbackReview&) = default;
};

void to_json(json& j, const FeedbackReview& r);
void from_json(const json& j, FeedbackReview& r);

struct ReviewFilter {
    std::optional<std::string> reviewer;
    std::optional<std::string> class_id;
    std::optional<FeedbackSource> source;
};

struct ReviewRates {
    std::size_t reviews = 0;
    std::optional<double> location;          // absent when no reviews match
    std::optional<double> visual_features;
    std::optional<double> subtype;
};

class ReviewStore {
public:
    void register_item(const FeedbackItem& item);
    bool has_item(const std::string& item_id) const;

    // Throws Error(dangling_reference) for unknown items and
    // Error(invalid_argument) for non-binary criteria.
    void record_review(const FeedbackReview& review);

    ReviewRates aggregate_reviews(const ReviewFilter& filter = {}) const;
    std::vector<FeedbackReview> reviews() const;

    // Header: feedback_item_ref,case_id,class_id,source,reviewer,
    //         location_correct,visual_features_correct,subtype_correct
    std::string export_csv() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, FeedbackItem> items_;
    std::vector<FeedbackReview> reviews_;
};

}  // namespace radgame
