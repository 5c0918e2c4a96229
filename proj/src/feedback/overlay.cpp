#include <algorithm>
#include <cmath>

#include "radgame/core/error.hpp"
#include "radgame/feedback/feedback.hpp"

namespace radgame {

PixelRect to_pixels(const BoundingBox& box, int width, int height) {
    auto px = [](double v, int extent) {
        return std::clamp(static_cast<int>(std::lround(v * extent)), 0, extent - 1);
    };
    return {px(box.x_min, width), px(box.y_min, height), px(box.x_max, width), px(box.y_max, height)};
}

Image render_overlay(const Image& image, const std::vector<BoundingBox>& boxes, const OverlayStyle& style) {
    if (style.thickness_px < 1) throw Error(ErrorCode::invalid_argument, "overlay thickness must be >= 1");
    Image out = image;
    if (image.empty()) return out;
    for (const auto& box : boxes) {
        require_valid(box);
        const auto r = to_pixels(box, image.width(), image.height());
        const int t = style.thickness_px;
        for (int y = r.y0; y <= r.y1; ++y) {
            for (int x = r.x0; x <= r.x1; ++x) {
                const bool edge = y < r.y0 + t || y > r.y1 - t || x < r.x0 + t || x > r.x1 - t;
                if (edge) out.set(x, y, style.color);
            }
        }
    }
    return out;
}

}  // namespace radgame
