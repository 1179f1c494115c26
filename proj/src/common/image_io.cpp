#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "splatgen/image.hpp"

namespace splatgen {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return f;
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int channels, std::span<const std::uint8_t> bytes) {
    if (bytes.size() != static_cast<std::size_t>(width) * height * channels) {
        throw ArgumentError("png buffer size does not match dimensions");
    }
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        auto* row = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * width * channels);
        png_write_row(png, row);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_raw_planes(const std::filesystem::path& path, std::uint32_t w, std::uint32_t h,
                      std::uint32_t channels, const std::vector<float>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string());
    }
    out.write("SPLATIMG1", 9);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(w);
    put_u32(h);
    put_u32(channels);
    for (float v : data) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, 4);
        put_u32(bits);
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace

std::uint8_t to_byte(double v) {
    double c = clamp01(v) * 255.0;
    return static_cast<std::uint8_t>(std::floor(c + 0.5));
}

void write_png_rgb(const std::filesystem::path& path, const ImageRgb& img) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(img.size() * 3);
    for (const Rgb& p : img.pixels()) {
        bytes.push_back(to_byte(p.r));
        bytes.push_back(to_byte(p.g));
        bytes.push_back(to_byte(p.b));
    }
    write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, 3, bytes);
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(img.size());
    for (float v : img.pixels()) {
        bytes.push_back(to_byte(v));
    }
    write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 1, bytes);
}

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> rgb) {
    write_png(path, width, height, PNG_COLOR_TYPE_RGB, 3, rgb);
}

Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw FormatError("not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) {
        png_set_strip_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if ((color & PNG_COLOR_MASK_ALPHA) != 0) {
        png_set_strip_alpha(png);
    }
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG layout: " + path.string());
    }
    Image<std::uint8_t> out(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, &out.at(0, y), nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    Image<std::uint8_t> gray = read_png_gray8(path);
    BinaryMask mask(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        mask.pixels()[i] = gray.pixels()[i] >= 128 ? 1 : 0;
    }
    return mask;
}

void write_raw(const std::filesystem::path& path, const ImageRgb& img) {
    // planar: all R, then all G, then all B
    std::vector<float> data(img.size() * 3);
    const std::size_t n = img.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Rgb& p = img.pixels()[i];
        data[i] = static_cast<float>(p.r);
        data[n + i] = static_cast<float>(p.g);
        data[2 * n + i] = static_cast<float>(p.b);
    }
    write_raw_planes(path, img.width(), img.height(), 3, data);
}

void write_raw(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<float> data(img.pixels().begin(), img.pixels().end());
    write_raw_planes(path, img.width(), img.height(), 1, data);
}

void write_raw(const std::filesystem::path& path, const IdBuffer& img) {
    std::vector<float> data;
    data.reserve(img.size());
    for (std::uint32_t v : img.pixels()) {
        data.push_back(static_cast<float>(v));
    }
    write_raw_planes(path, img.width(), img.height(), 1, data);
}

RawImage read_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[9] = {};
    in.read(magic, 9);
    if (!in || std::memcmp(magic, "SPLATIMG1", 9) != 0) {
        throw FormatError("bad SPLATIMG1 magic: " + path.string());
    }
    auto get_u32 = [&]() {
        unsigned char b[4] = {};
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) {
            throw FormatError("truncated SPLATIMG1 file: " + path.string());
        }
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    RawImage raw;
    raw.width = get_u32();
    raw.height = get_u32();
    raw.channels = get_u32();
    const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
    raw.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = get_u32();
        std::memcpy(&raw.data[i], &bits, 4);
    }
    return raw;
}

} // namespace splatgen
