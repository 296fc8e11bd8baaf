#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "irisqa/errors.hpp"

namespace irisqa {

/// 8-bit single-channel intensity grid, row-major. Pipeline inputs must be
/// at least 8x8 (see validate_min_size); smaller images may exist as
/// intermediate values, e.g. for encoding tests.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, length = width*height

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(check_dims(w, h), fill) {}
  GrayImage(int w, int h, std::vector<std::uint8_t> data)
      : width(w), height(h), pixels(std::move(data)) {
    if (pixels.size() != check_dims(w, h))
      throw ValidationError("GrayImage: pixel count does not match dimensions");
  }

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Replicate-padded read: out-of-range coordinates clamp to the border.
  std::uint8_t at_clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width) x = width - 1;
    if (y < 0) y = 0;
    if (y >= height) y = height - 1;
    return at(x, y);
  }

  void validate_min_size() const {
    if (width < 8 || height < 8)
      throw ValidationError("GrayImage: minimum size is 8x8, got " + std::to_string(width) +
                            "x" + std::to_string(height));
  }

 private:
  static std::size_t check_dims(int w, int h) {
    if (w < 1 || h < 1) throw ValidationError("GrayImage: dimensions must be positive");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// Row-major grid of real values (heatmaps, mask targets, intermediate maps).
struct RealGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  RealGrid() = default;
  RealGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(check_dims(w, h), fill) {}
  RealGrid(int w, int h, std::vector<double> data)
      : width(w), height(h), values(std::move(data)) {
    if (values.size() != check_dims(w, h))
      throw ValidationError("RealGrid: value count does not match dimensions");
  }

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

  void validate_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) throw ValidationError("RealGrid: non-finite value");
  }

  /// Heatmap contract: finite, values in [0, 1], strictly positive sum.
  void validate_heatmap() const {
    double sum = 0.0;
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("heatmap values must be finite and in [0, 1]");
      sum += v;
    }
    if (!(sum > 0.0)) throw ValidationError("heatmap sum must be strictly positive");
  }

 private:
  static std::size_t check_dims(int w, int h) {
    if (w < 1 || h < 1) throw ValidationError("RealGrid: dimensions must be positive");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// Dense (height, width, channels) tensor, channel index fastest.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), values(check_dims(w, h, c), fill) {}
  FeatureMap(int w, int h, int c, std::vector<double> data)
      : width(w), height(h), channels(c), values(std::move(data)) {
    if (values.size() != check_dims(w, h, c))
      throw ValidationError("FeatureMap: value count does not match dimensions");
  }

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + z;
  }
  double at(int x, int y, int z) const { return values[index(x, y, z)]; }
  double& at(int x, int y, int z) { return values[index(x, y, z)]; }

  void validate_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) throw ValidationError("FeatureMap: non-finite value");
  }

 private:
  static std::size_t check_dims(int w, int h, int c) {
    if (w < 1 || h < 1) throw ValidationError("FeatureMap: dimensions must be positive");
    if (c < 1) throw ValidationError("FeatureMap: channels must be >= 1");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c);
  }
};

}  // namespace irisqa
