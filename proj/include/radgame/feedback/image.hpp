#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace radgame {

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 255;
    friend bool operator==(const Rgba&, const Rgba&) = default;
};

// 8-bit RGBA raster, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgba fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    Rgba at(int x, int y) const;
    void set(int x, int y, Rgba color);

    const std::vector<std::uint8_t>& bytes() const { return pixels_; }
    std::vector<std::uint8_t>& bytes() { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// PNG or JPEG, detected from the signature. Throws Error(undecodable_image).
Image decode_image(std::span<const std::uint8_t> encoded);
Image load_image(const std::filesystem::path& path);

std::string encode_png(const Image& image);
void save_png(const std::filesystem::path& path, const Image& image);

}  // namespace radgame
