#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <string>

#include "irisqa/errors.hpp"
#include "irisqa/fsio.hpp"
#include "irisqa/image.hpp"

namespace irisqa {

namespace pgm_detail {

// Skips PGM whitespace and '#' comments, advancing pos. Returns false at EOF.
inline bool skip_space(const std::string& d, std::size_t& pos) {
  while (pos < d.size()) {
    unsigned char c = static_cast<unsigned char>(d[pos]);
    if (c == '#') {
      while (pos < d.size() && d[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      return true;
    }
  }
  return false;
}

inline long parse_uint(const std::string& d, std::size_t& pos, const char* what) {
  if (!skip_space(d, pos) || !std::isdigit(static_cast<unsigned char>(d[pos])))
    throw ValidationError(std::string("P5 header: missing ") + what);
  long v = 0;
  while (pos < d.size() && std::isdigit(static_cast<unsigned char>(d[pos]))) {
    v = v * 10 + (d[pos] - '0');
    if (v > 1'000'000'000L) throw ValidationError(std::string("P5 header: ") + what + " too large");
    ++pos;
  }
  return v;
}

}  // namespace pgm_detail

/// Reads a binary portable graymap (magic "P5", maxval 255). Images smaller
/// than 8x8 are rejected as pipeline inputs.
inline GrayImage read_image(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw IoError("no such image file: " + path.string());
  const std::string data = read_file(path);

  std::size_t pos = 0;
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw ValidationError("not a binary P5 graymap: " + path.string());
  pos = 2;
  const long w = pgm_detail::parse_uint(data, pos, "width");
  const long h = pgm_detail::parse_uint(data, pos, "height");
  const long maxval = pgm_detail::parse_uint(data, pos, "maxval");
  if (w <= 0 || h <= 0)
    throw ValidationError("P5 header: bad dimensions in " + path.string());
  if (maxval != 255)
    throw ValidationError("P5 maxval must be 255, got " + std::to_string(maxval) + " in " +
                          path.string());
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw ValidationError("P5 header: missing separator before pixel data in " + path.string());
  ++pos;  // exactly one whitespace byte separates header from payload

  const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < expected)
    throw ValidationError("P5 pixel data truncated in " + path.string() + ": expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(data.size() - pos));

  std::vector<std::uint8_t> pixels(expected);
  for (std::size_t i = 0; i < expected; ++i)
    pixels[i] = static_cast<std::uint8_t>(data[pos + i]);
  GrayImage img(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
  img.validate_min_size();
  return img;
}

/// Writes a binary P5 graymap. read_image inverts it exactly.
inline void write_image(const GrayImage& image, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  atomic_write_file(path, out);
}

}  // namespace irisqa
