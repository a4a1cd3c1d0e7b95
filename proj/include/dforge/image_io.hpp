#pragma once

#include "dforge/loss.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dforge {

struct RgbImage8 {
    std::vector<std::uint8_t> pixels; // H*W*3 interleaved
    int width = 0;
    int height = 0;
};

struct GrayImage8 {
    std::vector<std::uint8_t> pixels;
    int width = 0;
    int height = 0;
};

struct GrayImage16 {
    std::vector<std::uint16_t> pixels;
    int width = 0;
    int height = 0;
};

RgbImage8 read_png_rgb8(const std::string& path);
void write_png_rgb8(const std::string& path, const RgbImage8& img);

GrayImage8 read_png_gray8(const std::string& path);
void write_png_gray8(const std::string& path, const GrayImage8& img);

GrayImage16 read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const GrayImage16& img);

// [0,1] buffer from 8-bit RGB (v / 255) and back (round(v * 255)).
ImageBuffer to_image_buffer(const RgbImage8& img);
RgbImage8 to_rgb8(const ImageBuffer& img);

ConfidenceMap confidence_from_gray8(const GrayImage8& img); // v / 255
ConfidenceMap read_confidence_f32(const std::string& path, int width, int height);

} // namespace dforge
