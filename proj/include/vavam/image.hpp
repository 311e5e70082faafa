#pragma once

#include "vavam/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vavam {

// 8-bit RGB image, row-major, interleaved channels.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb;  // height*width*3

    Image() = default;
    Image(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {}

    std::uint8_t& at(int y, int x, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int y, int x, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    void set_pixel(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        at(y, x, 0) = r;
        at(y, x, 1) = g;
        at(y, x, 2) = b;
    }

    bool operator==(const Image& o) const {
        return height == o.height && width == o.width && rgb == o.rgb;
    }
};

// Planar float view of an image, values in [0,1], indexed (channel, y, x).
struct Volume {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Volume() = default;
    Volume(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0) {}

    double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

Volume image_to_volume(const Image& img);
Image volume_to_image(const Volume& v);  // clamps to [0,1] before 8-bit quantization

void write_png(const std::filesystem::path& path, const Image& img);
void write_raw_rgb(const std::filesystem::path& path, const Image& img);
Image read_raw_rgb(const std::filesystem::path& path, int height, int width);

}  // namespace vavam
