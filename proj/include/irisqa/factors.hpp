#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "irisqa/errors.hpp"
#include "irisqa/geometry.hpp"
#include "irisqa/image.hpp"

namespace irisqa {

/// The five hand-crafted quality factors.
struct FactorReport {
  double sharpness = 0.0;          // >= 0
  double iris_size = 0.0;          // pixels, > 0
  double dilation = 0.0;           // in (0, 1)
  double gray_level_spread = 0.0;  // bits, in [0, 8]
  double usable_area = 0.0;        // fraction in [0, 1]
};

/// Tenengrad focus measure: mean Sobel gradient magnitude over the image,
/// with replicate padding at the borders.
inline double sharpness(const GrayImage& image) {
  image.validate_min_size();
  double sum = 0.0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double p00 = image.at_clamped(x - 1, y - 1), p10 = image.at_clamped(x, y - 1),
                   p20 = image.at_clamped(x + 1, y - 1);
      const double p01 = image.at_clamped(x - 1, y), p21 = image.at_clamped(x + 1, y);
      const double p02 = image.at_clamped(x - 1, y + 1), p12 = image.at_clamped(x, y + 1),
                   p22 = image.at_clamped(x + 1, y + 1);
      const double gx = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
      const double gy = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
      sum += std::sqrt(gx * gx + gy * gy);
    }
  }
  return sum / (static_cast<double>(image.width) * image.height);
}

/// Pixels across the iris radius.
inline double iris_size(const IrisGeometry& geometry) {
  geometry.validate();
  return geometry.iris_radius;
}

/// Pupil-to-iris radius ratio, in (0, 1).
inline double dilation(const IrisGeometry& geometry) {
  geometry.validate();
  return geometry.pupil_radius / geometry.iris_radius;
}

/// Shannon entropy (base 2) of the 256-bin histogram over annulus pixels.
inline double gray_level_spread(const GrayImage& image, const IrisGeometry& geometry) {
  geometry.validate_within(image.width, image.height);
  std::array<std::int64_t, 256> hist{};
  std::int64_t total = 0;
  for_each_annulus_pixel(geometry, image.width, image.height, [&](int x, int y) {
    ++hist[image.at(x, y)];
    ++total;
  });
  if (total == 0) throw ValidationError("gray_level_spread: empty iris annulus");
  double entropy = 0.0;
  for (std::int64_t count : hist) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    entropy -= p * std::log2(p);
  }
  return entropy;
}

/// Fraction of annulus pixels marked usable.
inline double usable_area(const OcclusionMask& mask, const IrisGeometry& geometry) {
  geometry.validate_within(mask.width, mask.height);
  std::int64_t usable = 0, total = 0;
  for_each_annulus_pixel(geometry, mask.width, mask.height, [&](int x, int y) {
    usable += mask.at(x, y);
    ++total;
  });
  if (total == 0) throw ValidationError("usable_area: empty iris annulus");
  return static_cast<double>(usable) / static_cast<double>(total);
}

inline FactorReport factor_report(const GrayImage& image, const IrisGeometry& geometry,
                                  const OcclusionMask& mask) {
  if (mask.width != image.width || mask.height != image.height)
    throw ValidationError("factor_report: mask dimensions do not match image");
  geometry.validate_within(image.width, image.height);
  mask.validate_paired(geometry);
  FactorReport r;
  r.sharpness = sharpness(image);
  r.iris_size = iris_size(geometry);
  r.dilation = dilation(geometry);
  r.gray_level_spread = gray_level_spread(image, geometry);
  r.usable_area = usable_area(mask, geometry);
  return r;
}

}  // namespace irisqa
