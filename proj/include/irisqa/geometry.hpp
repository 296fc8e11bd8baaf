#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "irisqa/errors.hpp"
#include "irisqa/image.hpp"
#include "irisqa/pgm.hpp"

namespace irisqa {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Circle parameters for pupil and iris, in pixel coordinates.
struct IrisGeometry {
  Vec2 pupil_center;
  double pupil_radius = 0.0;
  Vec2 iris_center;
  double iris_radius = 0.0;

  void validate() const {
    if (!(pupil_radius > 0.0) || !(iris_radius > 0.0))
      throw ValidationError("IrisGeometry: radii must be positive");
    if (!(pupil_radius < iris_radius))
      throw ValidationError("IrisGeometry: pupil radius must be smaller than iris radius");
    for (double v : {pupil_center.x, pupil_center.y, iris_center.x, iris_center.y})
      if (!std::isfinite(v)) throw ValidationError("IrisGeometry: non-finite center");
  }

  /// Both circles must lie inside the paired image.
  void validate_within(int width, int height) const {
    validate();
    auto inside = [&](const Vec2& c, double r) {
      return c.x - r >= 0.0 && c.y - r >= 0.0 && c.x + r <= width && c.y + r <= height;
    };
    if (!inside(iris_center, iris_radius) || !inside(pupil_center, pupil_radius))
      throw ValidationError("IrisGeometry: circle exceeds image bounds");
  }
};

/// Annulus membership rule: the pixel center (x+0.5, y+0.5) belongs iff its
/// distance to the iris center lies in [pupil_radius, iris_radius).
inline bool in_annulus(const IrisGeometry& g, int x, int y) {
  const double dx = (x + 0.5) - g.iris_center.x;
  const double dy = (y + 0.5) - g.iris_center.y;
  const double d = std::sqrt(dx * dx + dy * dy);
  return d >= g.pupil_radius && d < g.iris_radius;
}

template <typename Fn>
void for_each_annulus_pixel(const IrisGeometry& g, int width, int height, Fn&& fn) {
  const int x0 = std::max(0, static_cast<int>(std::floor(g.iris_center.x - g.iris_radius)) - 1);
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(g.iris_center.x + g.iris_radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(g.iris_center.y - g.iris_radius)) - 1);
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(g.iris_center.y + g.iris_radius)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (in_annulus(g, x, y)) fn(x, y);
}

/// Binary usable-iris map: 1 = usable iris pixel, 0 = occluded or non-iris.
struct OcclusionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, values 0/1

  OcclusionMask() = default;
  OcclusionMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {
    if (w < 1 || h < 1) throw ValidationError("OcclusionMask: dimensions must be positive");
  }

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }

  /// Every 1-bit must lie inside the annulus of the paired geometry.
  void validate_paired(const IrisGeometry& g) const {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (at(x, y) && !in_annulus(g, x, y))
          throw ValidationError("OcclusionMask: usable bit outside the iris annulus at (" +
                                std::to_string(x) + ", " + std::to_string(y) + ")");
  }
};

/// Masks are stored as P5 files with values {0, 255}.
inline OcclusionMask read_mask(const std::filesystem::path& path) {
  const GrayImage img = read_image(path);
  OcclusionMask mask(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] != 0 && img.pixels[i] != 255)
      throw ValidationError("mask pixels must be 0 or 255: " + path.string());
    mask.bits[i] = img.pixels[i] ? 1 : 0;
  }
  return mask;
}

inline void write_mask(const OcclusionMask& mask, const std::filesystem::path& path) {
  GrayImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    img.pixels[i] = mask.bits[i] ? 255 : 0;
  write_image(img, path);
}

/// Area-majority downsampling to 1/factor resolution: a cell is 1 when at
/// least half of its source block is usable. Produces the heatmap-shaped
/// supervision target for training.
inline RealGrid downsample_mask_majority(const OcclusionMask& mask, int factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (mask.width % factor != 0 || mask.height % factor != 0)
    throw ValidationError("mask dimensions must be divisible by the downsample factor");
  RealGrid out(mask.width / factor, mask.height / factor);
  for (int cy = 0; cy < out.height; ++cy) {
    for (int cx = 0; cx < out.width; ++cx) {
      int ones = 0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          ones += mask.at(cx * factor + dx, cy * factor + dy);
      out.at(cx, cy) = (2 * ones >= factor * factor) ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace irisqa
