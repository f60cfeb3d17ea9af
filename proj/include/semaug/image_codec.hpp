#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semaug {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major RGB, 3 bytes per pixel

    bool operator==(const RgbImage&) const = default;
};

/// 8-bit RGB PNG. Output is deterministic for identical input.
std::vector<uint8_t> encode_png(const RgbImage& image);

/// Decodes any PNG libpng understands to 8-bit RGB (alpha dropped, palette and
/// grayscale expanded). Throws std::runtime_error on malformed data.
RgbImage decode_png(std::span<const uint8_t> png);

std::string base64_encode(std::span<const uint8_t> bytes);
/// Accepts padded or unpadded input; ignores ASCII whitespace. Throws
/// std::invalid_argument on other characters.
std::vector<uint8_t> base64_decode(std::string_view text);

}  // namespace semaug
