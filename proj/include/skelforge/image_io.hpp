#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skelforge/mask.hpp"

namespace skelforge {

/// 8-bit single channel raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// 8-bit interleaved RGB raster.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Decode PNG or GIF (first frame) to luminance. Alpha composites on black.
GrayImage decode_image(std::span<const std::uint8_t> bytes);
GrayImage decode_png(std::span<const std::uint8_t> bytes);
GrayImage decode_gif(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const GrayImage& image);
std::vector<std::uint8_t> encode_png(const RgbImage& image);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
/// Write through a temporary sibling and rename it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

GrayImage read_image(const std::filesystem::path& path);

/// Pixels at or above `threshold` become foreground.
BinaryMask binarize(const GrayImage& image, std::uint8_t threshold = 128);
GrayImage to_gray(const BinaryMask& mask);

/// Masks are stored as 0/255 grayscale PNG; any nonzero pixel reads back as foreground.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace skelforge
