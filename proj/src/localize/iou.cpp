#include <algorithm>

#include "radgame/localize/grading.hpp"

namespace radgame {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double area_a = box_area(a);
    const double area_b = box_area(b);
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

DrawGrade grade_draw(const std::vector<BoundingBox>& user_boxes, const std::vector<BoundingBox>& gt_boxes,
                     double threshold) {
    if (gt_boxes.empty()) {
        throw Error(ErrorCode::invalid_argument, "a Draw finding needs at least one ground-truth box");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "IoU threshold must lie in (0,1)");
    }

    std::vector<BoxMatch> candidates;
    for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
        for (std::size_t u = 0; u < user_boxes.size(); ++u) {
            const double v = iou(user_boxes[u], gt_boxes[g]);
            if (v > threshold) candidates.push_back({u, g, v});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const BoxMatch& x, const BoxMatch& y) { return x.iou > y.iou; });

    DrawGrade grade;
    std::vector<bool> gt_used(gt_boxes.size(), false);
    std::vector<bool> user_used(user_boxes.size(), false);
    for (const auto& m : candidates) {
        if (gt_used[m.gt_index] || user_used[m.user_index]) continue;
        gt_used[m.gt_index] = true;
        user_used[m.user_index] = true;
        grade.pairs.push_back(m);
    }
    for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
        if (!gt_used[g]) grade.missed_gt_indices.push_back(g);
    }
    for (std::size_t u = 0; u < user_boxes.size(); ++u) {
        if (!user_used[u]) grade.spurious_user_indices.push_back(u);
    }
    grade.credited = !grade.pairs.empty();
    return grade;
}

}  // namespace radgame
