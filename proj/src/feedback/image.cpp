#include "radgame/feedback/image.hpp"

#include <png.h>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>

#include "radgame/core/error.hpp"
#include "radgame/core/serialization.hpp"

namespace radgame {

Image::Image(int width, int height, Rgba fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(ErrorCode::invalid_argument, "negative image size");
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4);
    for (std::size_t i = 0; i < pixels_.size(); i += 4) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
        pixels_[i + 3] = fill.a;
    }
}

Rgba Image::at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 4;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2], pixels_[i + 3]};
}

void Image::set(int x, int y, Rgba c) {
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 4;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
    pixels_[i + 3] = c.a;
}

namespace {

Image decode_png(std::span<const std::uint8_t> encoded) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, encoded.data(), encoded.size())) {
        throw Error(ErrorCode::undecodable_image, std::string("PNG header: ") + img.message);
    }
    img.format = PNG_FORMAT_RGBA;
    Image out(static_cast<int>(img.width), static_cast<int>(img.height));
    if (!png_image_finish_read(&img, nullptr, out.bytes().data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error(ErrorCode::undecodable_image, std::string("PNG body: ") + img.message);
    }
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, mgr->message);
    std::longjmp(mgr->jump, 1);
}

Image decode_jpeg(std::span<const std::uint8_t> encoded) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    std::vector<std::uint8_t> row;
    Image out;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorCode::undecodable_image, std::string("JPEG: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, encoded.data(), static_cast<unsigned long>(encoded.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    out = Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    row.resize(static_cast<std::size_t>(cinfo.output_width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        JSAMPROW rows[1] = {row.data()};
        jpeg_read_scanlines(&cinfo, rows, 1);
        for (int x = 0; x < out.width(); ++x) {
            out.set(x, y, {row[static_cast<std::size_t>(x) * 3], row[static_cast<std::size_t>(x) * 3 + 1],
                           row[static_cast<std::size_t>(x) * 3 + 2], 255});
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> encoded) {
    static constexpr std::uint8_t png_sig[] = {0x89, 'P', 'N', 'G'};
    if (encoded.size() >= 4 && std::memcmp(encoded.data(), png_sig, 4) == 0) return decode_png(encoded);
    if (encoded.size() >= 3 && encoded[0] == 0xFF && encoded[1] == 0xD8 && encoded[2] == 0xFF) {
        return decode_jpeg(encoded);
    }
    throw Error(ErrorCode::undecodable_image, "not a PNG or JPEG image");
}

Image load_image(const std::filesystem::path& path) {
    const auto data = read_text_file(path);
    try {
        return decode_image({reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string encode_png(const Image& image) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.bytes().data(), 0, nullptr)) {
        throw Error(ErrorCode::io_error, std::string("PNG encode: ") + img.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.bytes().data(), 0, nullptr)) {
        throw Error(ErrorCode::io_error, std::string("PNG encode: ") + img.message);
    }
    out.resize(size);
    return out;
}

void save_png(const std::filesystem::path& path, const Image& image) { write_text_file(path, encode_png(image)); }

}  // namespace radgame
