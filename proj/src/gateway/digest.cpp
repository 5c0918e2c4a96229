#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "radgame/core/error.hpp"
#include "radgame/gateway/gateway.hpp"

namespace radgame {

std::string request_digest(const GatewayRequest& req) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::transport_error, "sha256 unavailable");
    }
    auto feed = [&](std::string_view part) {
        // Length prefix keeps field boundaries unambiguous.
        const auto len = std::to_string(part.size()) + ":";
        EVP_DigestUpdate(ctx.get(), len.data(), len.size());
        EVP_DigestUpdate(ctx.get(), part.data(), part.size());
    };
    feed(to_string(req.role));
    feed(req.prompt);
    for (const auto& img : req.images) {
        feed(img.media_type);
        feed(img.base64);
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int md_len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &md_len);
    std::string hex;
    hex.reserve(md_len * 2);
    char buf[3];
    for (unsigned int i = 0; i < md_len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace radgame
