#include "vavam/image.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>

namespace vavam {

Volume image_to_volume(const Image& img) {
    Volume v(3, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                v.at(c, y, x) = img.at(y, x, c) / 255.0;
    return v;
}

Image volume_to_image(const Volume& v) {
    if (v.channels != 3) throw ShapeError("volume_to_image: expected 3 channels");
    Image img(v.height, v.width);
    for (int y = 0; y < v.height; ++y)
        for (int x = 0; x < v.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double p = std::clamp(v.at(c, y, x), 0.0, 1.0);
                img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(p * 255.0));
            }
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw std::runtime_error("write_png: cannot open " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("write_png: libpng failure for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(&img.rgb[static_cast<std::size_t>(y) * img.width * 3]);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void write_raw_rgb(const std::filesystem::path& path, const Image& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_raw_rgb: cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

Image read_raw_rgb(const std::filesystem::path& path, int height, int width) {
    Image img(height, width);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw LoadError("read_raw_rgb: cannot open " + path.string());
    f.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.rgb.size()))
        throw LoadError("read_raw_rgb: truncated file " + path.string());
    return img;
}

}  // namespace vavam
