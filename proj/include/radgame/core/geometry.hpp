#pragma once

#include <optional>
#include <string>

namespace radgame {

// Axis-aligned rectangle in normalized image coordinates: every coordinate is a
// fraction of the image width (x) or height (y). Grading never sees pixels.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Returns std::nullopt when the box is well formed, otherwise the name of the
/// first violated constraint ("coordinates in [0,1]", "x_min < x_max", ...).
std::optional<std::string> validate_box(const BoundingBox& box);

/// Throws Error(invalid_box) unless validate_box passes.
void require_valid(const BoundingBox& box);

double box_area(const BoundingBox& box);

BoundingBox translated(const BoundingBox& box, double dx, double dy);

// Pixel-space rectangle to normalized; coordinates outside the image are
// clamped. `clamped` reports whether clamping happened.
BoundingBox normalize_pixel_box(double x_min, double y_min, double x_max, double y_max,
                                int width_px, int height_px, bool* clamped = nullptr);

}  // namespace radgame
