#include "radgame/core/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "radgame/core/error.hpp"

namespace radgame {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

std::optional<std::string> validate_box(const BoundingBox& box) {
    if (!in_unit(box.x_min) || !in_unit(box.y_min) || !in_unit(box.x_max) || !in_unit(box.y_max)) {
        return "coordinates in [0,1]";
    }
    if (!(box.x_min < box.x_max)) return "x_min < x_max";
    if (!(box.y_min < box.y_max)) return "y_min < y_max";
    // Positive width and height can still underflow to zero area.
    if (!((box.x_max - box.x_min) * (box.y_max - box.y_min) > 0.0)) return "area > 0";
    return std::nullopt;
}

void require_valid(const BoundingBox& box) {
    if (auto violation = validate_box(box)) {
        throw Error(ErrorCode::invalid_box, "invalid bounding box: " + *violation, *violation);
    }
}

double box_area(const BoundingBox& box) {
    require_valid(box);
    return (box.x_max - box.x_min) * (box.y_max - box.y_min);
}

BoundingBox translated(const BoundingBox& box, double dx, double dy) {
    return {box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy};
}

BoundingBox normalize_pixel_box(double x_min, double y_min, double x_max, double y_max,
                                int width_px, int height_px, bool* clamped) {
    if (width_px <= 0 || height_px <= 0) {
        throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
    }
    const double w = width_px;
    const double h = height_px;
    auto clamp_to = [&](double v, double hi) {
        const double c = std::clamp(v, 0.0, hi);
        if (c != v && clamped) *clamped = true;
        return c;
    };
    if (clamped) *clamped = false;
    return {clamp_to(x_min, w) / w, clamp_to(y_min, h) / h,
            clamp_to(x_max, w) / w, clamp_to(y_max, h) / h};
}

}  // namespace radgame
