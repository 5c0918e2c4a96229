#include "radgame/core/csv.hpp"
#include "radgame/core/error.hpp"
#include "radgame/feedback/feedback.hpp"

namespace radgame {

void to_json(json& j, const FeedbackReview& r) {
    j = json{{"feedback_item_ref", r.feedback_item_ref},
             {"reviewer", r.reviewer},
             {"location_correct", r.location_correct},
             {"visual_features_correct", r.visual_features_correct},
             {"subtype_correct", r.subtype_correct}};
}

void from_json(const json& j, FeedbackReview& r) {
    r.feedback_item_ref = require_field<std::string>(j, "feedback_item_ref");
    r.reviewer = require_field<std::string>(j, "reviewer");
    r.location_correct = require_field<int>(j, "location_correct");
    r.visual_features_correct = require_field<int>(j, "visual_features_correct");
    r.subtype_correct = require_field<int>(j, "subtype_correct");
}

void ReviewStore::register_item(const FeedbackItem& item) {
    std::lock_guard lock(mutex_);
    items_[item.item_id] = item;
}

bool ReviewStore::has_item(const std::string& item_id) const {
    std::lock_guard lock(mutex_);
    return items_.count(item_id) > 0;
}

void ReviewStore::record_review(const FeedbackReview& review) {
    auto binary = [](int v) { return v == 0 || v == 1; };
    if (!binary(review.location_correct) || !binary(review.visual_features_correct) ||
        !binary(review.subtype_correct)) {
        throw Error(ErrorCode::invalid_argument, "review criteria must be 0 or 1");
    }
    if (review.reviewer.empty()) throw Error(ErrorCode::invalid_argument, "reviewer is required");
    std::lock_guard lock(mutex_);
    if (!items_.count(review.feedback_item_ref)) {
        throw Error(ErrorCode::dangling_reference, "unknown feedback item '" + review.feedback_item_ref + "'");
    }
    reviews_.push_back(review);
}

ReviewRates ReviewStore::aggregate_reviews(const ReviewFilter& filter) const {
    std::lock_guard lock(mutex_);
    ReviewRates rates;
    double loc = 0, vis = 0, sub = 0;
    for (const auto& r : reviews_) {
        const auto& item = items_.at(r.feedback_item_ref);
        if (filter.reviewer && r.reviewer != *filter.reviewer) continue;
        if (filter.class_id && item.class_id != *filter.class_id) continue;
        if (filter.source && item.source != *filter.source) continue;
        ++rates.reviews;
        loc += r.location_correct;
        vis += r.visual_features_correct;
        sub += r.subtype_correct;
    }
    if (rates.reviews > 0) {
        const double n = static_cast<double>(rates.reviews);
        rates.location = loc / n;
        rates.visual_features = vis / n;
        rates.subtype = sub / n;
    }
    return rates;
}

std::vector<FeedbackReview> ReviewStore::reviews() const {
    std::lock_guard lock(mutex_);
    return reviews_;
}

std::string ReviewStore::export_csv() const {
    std::lock_guard lock(mutex_);
    csv::Table table;
    table.header = {"feedback_item_ref", "case_id", "class_id", "source", "reviewer", "location_correct",
                    "visual_features_correct", "subtype_correct"};
    for (const auto& r : reviews_) {
        const auto& item = items_.at(r.feedback_item_ref);
        table.rows.push_back({r.feedback_item_ref, item.case_id, item.class_id, std::string(to_string(item.source)),
                        r.reviewer, std::to_string(r.location_correct), std::to_string(r.visual_features_correct),
                        std::to_string(r.subtype_correct)});
    }
    return csv::format_table(table);
}

}  // namespace radgame
