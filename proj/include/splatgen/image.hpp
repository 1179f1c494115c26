#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splatgen/errors.hpp"
#include "splatgen/math.hpp"

namespace splatgen {

/// Row-major single-plane image. Used for depth, illumination and id passes.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width < 0 || height < 0) {
            throw ArgumentError("image dimensions must be non-negative");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }

    std::span<T> pixels() { return data_; }
    std::span<const T> pixels() const { return data_; }

    bool same_shape(int w, int h) const { return w == width_ && h == height_; }
    template <typename U>
    bool same_shape(const Image<U>& other) const {
        return other.width() == width_ && other.height() == height_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ImageRgb = Image<Rgb>;
using GrayImage = Image<float>;
using DepthBuffer = Image<float>;
using IdBuffer = Image<std::uint32_t>;
using ShadowMapPass = Image<float>;
using BinaryMask = Image<std::uint8_t>;

// 8-bit PNG I/O. Float values are clamped to [0,1] and rounded half-up.
void write_png_rgb(const std::filesystem::path& path, const ImageRgb& img);
void write_png_gray(const std::filesystem::path& path, const GrayImage& img);
void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> rgb);
/// Reads an 8-bit PNG as grayscale (colour inputs are converted by luminance).
Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path);
/// Loads a mask PNG: pixel >= 128 becomes 1.
BinaryMask read_mask_png(const std::filesystem::path& path);

std::uint8_t to_byte(double v);

// SPLATIMG1 raw float dumps: magic, u32 width, u32 height, u32 channels, f32 LE data.
struct RawImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    std::vector<float> data;
};

void write_raw(const std::filesystem::path& path, const ImageRgb& img);
void write_raw(const std::filesystem::path& path, const GrayImage& img);
void write_raw(const std::filesystem::path& path, const IdBuffer& img);
RawImage read_raw(const std::filesystem::path& path);

} // namespace splatgen
