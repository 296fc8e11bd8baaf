#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "irisqa/embedding.hpp"
#include "irisqa/errors.hpp"
#include "irisqa/geometry.hpp"
#include "irisqa/image.hpp"
#include "irisqa/manifest.hpp"
#include "irisqa/pgm.hpp"
#include "irisqa/rng.hpp"

namespace irisqa {

/// Controllable distortions applied to one generated sample. Motion blur and
/// off-angle are approximated by isotropic blur and a center offset.
struct DistortionSpec {
  double blur_sigma = 0.0;         // Gaussian blur, >= 0
  double occlusion_fraction = 0.0; // fraction of the annulus hidden by the top band, [0, 1]
  double exposure_gain = 1.0;      // intensity multiplier with clamping, > 0
  double dilation_target = 0.45;   // pupil radius as a fraction of iris radius, (0, 1)
  double off_center_px = 0.0;      // iris center offset from image center, >= 0

  void validate() const {
    if (!(blur_sigma >= 0.0)) throw ValidationError("DistortionSpec: blur_sigma >= 0");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction <= 1.0))
      throw ValidationError("DistortionSpec: occlusion_fraction in [0, 1]");
    if (!(exposure_gain > 0.0)) throw ValidationError("DistortionSpec: exposure_gain > 0");
    if (!(dilation_target > 0.0 && dilation_target < 1.0))
      throw ValidationError("DistortionSpec: dilation_target in (0, 1)");
    if (!(off_center_px >= 0.0)) throw ValidationError("DistortionSpec: off_center_px >= 0");
  }
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Contribution of each normalized distortion magnitude to the severity that
/// drives the embedding perturbation. Defaults roughly mirror the impact
/// ordering of the factors on recognition performance.
struct SeverityWeights {
  double blur = 0.35;
  double occlusion = 0.30;
  double exposure = 0.15;
  double dilation = 0.10;
  double off_center = 0.10;
};

struct SynthConfig {
  int n_classes = 20;
  int samples_per_class = 20;
  int width = 128;   // divisible by 4
  int height = 96;   // divisible by 4
  int embedding_dim = 64;
  std::uint64_t seed = 1;

  Range blur_range{0.0, 3.0};
  Range occlusion_range{0.0, 0.5};
  Range exposure_range{0.5, 1.8};
  Range dilation_range{0.25, 0.65};
  Range off_center_range{0.0, 8.0};
  Range iris_radius_range{26.0, 36.0};  // varies iris size across samples
  double dilation_ideal = 0.45;

  double class_separation = 0.5;         // max allowed pairwise class cosine
  double kappa = 2.5;                    // severity-to-embedding-noise coefficient
  SeverityWeights weights;

  void validate() const {
    if (n_classes < 2) throw ValidationError("SynthConfig: n_classes >= 2");
    if (samples_per_class < 2) throw ValidationError("SynthConfig: samples_per_class >= 2");
    if (width < 8 || height < 8 || width % 4 != 0 || height % 4 != 0)
      throw ValidationError("SynthConfig: image size must be >= 8 and divisible by 4");
    if (embedding_dim < 2) throw ValidationError("SynthConfig: embedding_dim >= 2");
    if (!(kappa > 0.0)) throw ValidationError("SynthConfig: kappa > 0");
    if (!(class_separation > 0.0 && class_separation < 1.0))
      throw ValidationError("SynthConfig: class_separation in (0, 1)");
    for (const Range* r : {&blur_range, &occlusion_range, &exposure_range, &dilation_range,
                           &off_center_range, &iris_radius_range})
      if (!(r->lo <= r->hi)) throw ValidationError("SynthConfig: range lo must be <= hi");
    if (!(dilation_range.lo > 0.0 && dilation_range.hi < 1.0))
      throw ValidationError("SynthConfig: dilation range must stay inside (0, 1)");
    if (!(exposure_range.lo > 0.0)) throw ValidationError("SynthConfig: exposure gains > 0");
    if (!(iris_radius_range.lo >= 4.0))
      throw ValidationError("SynthConfig: iris radius too small to rasterize");
    // largest iris plus largest offset must stay inside the frame
    const double reach = iris_radius_range.hi + off_center_range.hi;
    if (reach > std::min(width, height) / 2.0)
      throw ValidationError("SynthConfig: iris radius + off-center offset exceeds image bounds");
  }

  /// Scales the geometry-dependent defaults to a given frame size.
  static SynthConfig sized(int w, int h) {
    SynthConfig c;
    c.width = w;
    c.height = h;
    const double half = std::min(w, h) / 2.0;
    c.iris_radius_range = Range{0.55 * half, 0.75 * half};
    c.off_center_range = Range{0.0, 0.16 * half};
    return c;
  }
};

inline void to_json(nlohmann::json& j, const Range& r) { j = nlohmann::json{r.lo, r.hi}; }
inline void from_json(const nlohmann::json& j, Range& r) {
  r.lo = j.at(0).get<double>();
  r.hi = j.at(1).get<double>();
}

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_classes", c.n_classes},
                     {"samples_per_class", c.samples_per_class},
                     {"width", c.width},
                     {"height", c.height},
                     {"embedding_dim", c.embedding_dim},
                     {"seed", c.seed},
                     {"blur_range", c.blur_range},
                     {"occlusion_range", c.occlusion_range},
                     {"exposure_range", c.exposure_range},
                     {"dilation_range", c.dilation_range},
                     {"off_center_range", c.off_center_range},
                     {"iris_radius_range", c.iris_radius_range},
                     {"dilation_ideal", c.dilation_ideal},
                     {"class_separation", c.class_separation},
                     {"kappa", c.kappa},
                     {"severity_weights",
                      {c.weights.blur, c.weights.occlusion, c.weights.exposure,
                       c.weights.dilation, c.weights.off_center}}};
}

inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  c = SynthConfig{};
  if (j.contains("width") || j.contains("height")) {
    c = SynthConfig::sized(j.value("width", c.width), j.value("height", c.height));
  }
  if (j.contains("n_classes")) j.at("n_classes").get_to(c.n_classes);
  if (j.contains("samples_per_class")) j.at("samples_per_class").get_to(c.samples_per_class);
  if (j.contains("embedding_dim")) j.at("embedding_dim").get_to(c.embedding_dim);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("blur_range")) j.at("blur_range").get_to(c.blur_range);
  if (j.contains("occlusion_range")) j.at("occlusion_range").get_to(c.occlusion_range);
  if (j.contains("exposure_range")) j.at("exposure_range").get_to(c.exposure_range);
  if (j.contains("dilation_range")) j.at("dilation_range").get_to(c.dilation_range);
  if (j.contains("off_center_range")) j.at("off_center_range").get_to(c.off_center_range);
  if (j.contains("iris_radius_range")) j.at("iris_radius_range").get_to(c.iris_radius_range);
  if (j.contains("dilation_ideal")) j.at("dilation_ideal").get_to(c.dilation_ideal);
  if (j.contains("class_separation")) j.at("class_separation").get_to(c.class_separation);
  if (j.contains("kappa")) j.at("kappa").get_to(c.kappa);
  if (j.contains("severity_weights")) {
    const auto& w = j.at("severity_weights");
    c.weights.blur = w.at(0).get<double>();
    c.weights.occlusion = w.at(1).get<double>();
    c.weights.exposure = w.at(2).get<double>();
    c.weights.dilation = w.at(3).get<double>();
    c.weights.off_center = w.at(4).get<double>();
  }
  c.validate();
}

/// Per-class rendering parameters and the class's ground-truth embedding.
struct ClassPrototype {
  int class_index = 0;
  std::string class_id;
  Embedding embedding;
  double base_intensity = 120.0;  // mean iris brightness
  double furrow_freq = 8.0;       // angular texture frequency
  double furrow_phase = 0.0;
  double furrow_amp = 30.0;
  double ring_freq = 3.0;         // radial texture frequency
  double ring_phase = 0.0;
  double ring_amp = 18.0;
};

namespace synth_detail {

// rng stream tags
constexpr std::uint64_t kTagClassEmbedding = 0x01;
constexpr std::uint64_t kTagClassTexture = 0x02;
constexpr std::uint64_t kTagSampleGeometry = 0x03;
constexpr std::uint64_t kTagSampleNoise = 0x04;
constexpr std::uint64_t kTagSampleEmbedding = 0x05;
constexpr std::uint64_t kTagSampleSpec = 0x06;

inline Embedding random_unit(int dim, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.next_normal();
  return Embedding(std::move(v));
}

inline std::string class_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%03d", k);
  return buf;
}

inline std::string sample_name(int k, int s) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%03d_s%03d", k, s);
  return buf;
}

}  // namespace synth_detail

/// Generates class prototypes 0..k. Embeddings are rejection-resampled so all
/// pairwise cosines stay below the configured separation. Deterministic in
/// (seed, class index): regenerating any prefix gives identical prototypes.
inline std::vector<ClassPrototype> gen_class_table(const SynthConfig& config, int up_to) {
  config.validate();
  if (up_to < 0 || up_to >= config.n_classes)
    throw ValidationError("gen_class_table: class index out of range");
  std::vector<ClassPrototype> table;
  std::vector<Embedding> chosen;
  for (int k = 0; k <= up_to; ++k) {
    const std::uint64_t kid = static_cast<std::uint64_t>(k);
    Embedding emb({1.0});
    bool ok = false;
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      Rng rng = Rng::stream(config.seed, {synth_detail::kTagClassEmbedding, kid,
                                          static_cast<std::uint64_t>(attempt)});
      emb = synth_detail::random_unit(config.embedding_dim, rng);
      ok = true;
      for (const Embedding& other : chosen) {
        double dot = 0.0;
        for (int i = 0; i < emb.dim(); ++i) dot += emb.values()[i] * other.values()[i];
        if (dot >= config.class_separation) {
          ok = false;
          break;
        }
      }
    }
    if (!ok)
      throw ValidationError("gen_class_table: cannot satisfy class separation " +
                            std::to_string(config.class_separation) + " for class " +
                            std::to_string(k) + "; lower it or raise embedding_dim");
    chosen.push_back(emb);

    // identity is carried by the embedding; textures differ mostly in phase
    // and frequency so the image-level severity cues stay comparable
    Rng tex = Rng::stream(config.seed, {synth_detail::kTagClassTexture, kid});
    ClassPrototype proto{k, synth_detail::class_name(k), emb};
    proto.base_intensity = tex.uniform(112.0, 128.0);
    proto.furrow_freq = static_cast<double>(4 + tex.next_below(9));  // 4..12 furrows
    proto.furrow_phase = tex.uniform(0.0, 2.0 * std::numbers::pi);
    proto.furrow_amp = tex.uniform(26.0, 36.0);
    proto.ring_freq = static_cast<double>(2 + tex.next_below(4));  // 2..5 rings
    proto.ring_phase = tex.uniform(0.0, 2.0 * std::numbers::pi);
    proto.ring_amp = tex.uniform(12.0, 20.0);
    table.push_back(std::move(proto));
  }
  return table;
}

inline ClassPrototype gen_class(const SynthConfig& config, int class_index) {
  return gen_class_table(config, class_index).back();
}

/// Weighted sum of normalized distortion magnitudes, in [0, 1]. Each
/// component is normalized by its configured range and clamped.
inline double severity(const SynthConfig& config, const DistortionSpec& spec) {
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  auto ratio = [&](double v, double hi) { return hi > 0.0 ? clamp01(v / hi) : 0.0; };
  const double blur_n = ratio(spec.blur_sigma, config.blur_range.hi);
  const double occ_n = ratio(spec.occlusion_fraction, config.occlusion_range.hi);
  const double exp_span = std::max(std::abs(std::log2(config.exposure_range.lo)),
                                   std::abs(std::log2(config.exposure_range.hi)));
  const double exp_n = exp_span > 0.0 ? clamp01(std::abs(std::log2(spec.exposure_gain)) / exp_span) : 0.0;
  const double dil_span = std::max(config.dilation_range.hi - config.dilation_ideal,
                                   config.dilation_ideal - config.dilation_range.lo);
  const double dil_n =
      dil_span > 0.0 ? clamp01(std::abs(spec.dilation_target - config.dilation_ideal) / dil_span)
                     : 0.0;
  const double off_n = ratio(spec.off_center_px, config.off_center_range.hi);
  const SeverityWeights& w = config.weights;
  return clamp01(w.blur * blur_n + w.occlusion * occ_n + w.exposure * exp_n + w.dilation * dil_n +
                 w.off_center * off_n);
}

struct SynthSample {
  GrayImage image;
  IrisGeometry geometry;
  OcclusionMask mask;
  Embedding embedding;
  double severity = 0.0;
  bool enrollment_candidate = false;  // zero-distortion sample
};

namespace synth_detail {

inline void gaussian_blur_inplace(GrayImage& img, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;

  std::vector<double> tmp(img.pixels.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * img.at_clamped(x + i, y);
      tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
    }
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yy = std::clamp(y + i, 0, img.height - 1);
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(yy) * img.width + x];
      }
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
}

/// Row below which `fraction` of the annulus pixels lie under the top band.
inline int occlusion_cut_row(const IrisGeometry& g, int width, int height, double fraction) {
  if (fraction <= 0.0) return 0;
  std::vector<std::int64_t> per_row(height, 0);
  std::int64_t total = 0;
  for_each_annulus_pixel(g, width, height, [&](int, int y) {
    ++per_row[y];
    ++total;
  });
  if (total == 0) return 0;
  const double want = fraction * static_cast<double>(total);
  std::int64_t covered = 0;
  for (int y = 0; y < height; ++y) {
    if (static_cast<double>(covered) >= want) return y;
    covered += per_row[y];
  }
  return height;
}

}  // namespace synth_detail

/// Renders one sample: concentric pupil/iris with class texture, then the
/// requested distortions. The embedding is the class embedding pushed along a
/// seeded Gaussian direction by kappa * severity and renormalized; a
/// zero-distortion spec reproduces the class embedding exactly.
inline SynthSample gen_sample(const SynthConfig& config, const ClassPrototype& proto,
                              const DistortionSpec& spec, int sample_index) {
  config.validate();
  spec.validate();
  const std::uint64_t kid = static_cast<std::uint64_t>(proto.class_index);
  const std::uint64_t sid = static_cast<std::uint64_t>(sample_index);

  Rng geom_rng = Rng::stream(config.seed, {synth_detail::kTagSampleGeometry, kid, sid});
  const double iris_r = geom_rng.uniform(config.iris_radius_range.lo, config.iris_radius_range.hi);
  const double angle = geom_rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double cx = config.width / 2.0 + spec.off_center_px * std::cos(angle);
  const double cy = config.height / 2.0 + spec.off_center_px * std::sin(angle);
  const double pupil_r = spec.dilation_target * iris_r;

  SynthSample out{GrayImage(config.width, config.height),
                  IrisGeometry{{cx, cy}, pupil_r, {cx, cy}, iris_r},
                  OcclusionMask(config.width, config.height),
                  proto.embedding,
                  0.0,
                  false};
  out.geometry.validate_within(config.width, config.height);

  Rng noise = Rng::stream(config.seed, {synth_detail::kTagSampleNoise, kid, sid});
  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) {
      const double dx = (x + 0.5) - cx;
      const double dy = (y + 0.5) - cy;
      const double d = std::sqrt(dx * dx + dy * dy);
      double v;
      if (d < pupil_r) {
        v = 28.0 + 6.0 * (d / pupil_r);
      } else if (d < iris_r) {
        const double t = (d - pupil_r) / (iris_r - pupil_r);
        const double theta = std::atan2(dy, dx);
        v = proto.base_intensity +
            proto.furrow_amp * (1.0 - 0.3 * t) *
                std::sin(proto.furrow_freq * theta + proto.furrow_phase) +
            proto.ring_amp * std::sin(2.0 * std::numbers::pi * proto.ring_freq * t +
                                      proto.ring_phase);
      } else {
        v = 205.0;
      }
      v += noise.uniform(-3.0, 3.0);
      out.image.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }

  // eyelid-like band from the top, with a soft shadow below the lid edge;
  // the mask keeps only unoccluded annulus pixels
  const int cut = synth_detail::occlusion_cut_row(out.geometry, config.width, config.height,
                                                  spec.occlusion_fraction);
  for (int y = 0; y < cut; ++y)
    for (int x = 0; x < config.width; ++x) {
      const double v = 178.0 + noise.uniform(-3.0, 3.0);
      out.image.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  if (cut > 0) {
    const int shadow_rows = std::max(2, config.height / 8);
    for (int y = cut; y < std::min(config.height, cut + shadow_rows); ++y) {
      const double fade = 0.55 + 0.45 * (y - cut + 1) / static_cast<double>(shadow_rows);
      for (int x = 0; x < config.width; ++x)
        out.image.at(x, y) = static_cast<std::uint8_t>(
            std::clamp(std::lround(out.image.at(x, y) * fade), 0L, 255L));
    }
  }
  for_each_annulus_pixel(out.geometry, config.width, config.height, [&](int x, int y) {
    if (y >= cut) out.mask.at(x, y) = 1;
  });

  if (spec.exposure_gain != 1.0)
    for (std::uint8_t& p : out.image.pixels)
      p = static_cast<std::uint8_t>(std::clamp(std::lround(p * spec.exposure_gain), 0L, 255L));
  synth_detail::gaussian_blur_inplace(out.image, spec.blur_sigma);

  out.severity = severity(config, spec);
  out.enrollment_candidate = out.severity == 0.0;
  if (out.severity > 0.0) {
    // Gaussian direction in the orthogonal complement of the class embedding:
    // the probe's distance to enrollment is then an exact monotone function
    // of severity, giving the concentric quality shells around the class
    // embedding by construction.
    Rng emb_rng = Rng::stream(config.seed, {synth_detail::kTagSampleEmbedding, kid, sid});
    std::vector<double> dir;
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<double> g(config.embedding_dim);
      for (double& x : g) x = emb_rng.next_normal();
      double along = 0.0;
      for (int i = 0; i < config.embedding_dim; ++i) along += g[i] * proto.embedding.values()[i];
      for (int i = 0; i < config.embedding_dim; ++i) g[i] -= along * proto.embedding.values()[i];
      if (norm_of(g) > 1e-9) {
        dir = std::move(g);
        break;
      }
    }
    if (dir.empty()) throw NumericError("gen_sample: degenerate noise direction");
    const Embedding unit_dir{std::move(dir)};
    std::vector<double> v = proto.embedding.values();
    for (int i = 0; i < config.embedding_dim; ++i)
      v[i] += config.kappa * out.severity * unit_dir.values()[i];
    out.embedding = Embedding(std::move(v));
  }
  return out;
}

/// Draws a distortion spec uniformly from the configured ranges.
inline DistortionSpec draw_spec(const SynthConfig& config, int class_index, int sample_index) {
  Rng rng = Rng::stream(config.seed, {synth_detail::kTagSampleSpec,
                                      static_cast<std::uint64_t>(class_index),
                                      static_cast<std::uint64_t>(sample_index)});
  DistortionSpec s;
  s.blur_sigma = rng.uniform(config.blur_range.lo, config.blur_range.hi);
  s.occlusion_fraction = rng.uniform(config.occlusion_range.lo, config.occlusion_range.hi);
  s.exposure_gain = rng.uniform(config.exposure_range.lo, config.exposure_range.hi);
  s.dilation_target = rng.uniform(config.dilation_range.lo, config.dilation_range.hi);
  s.off_center_px = rng.uniform(config.off_center_range.lo, config.off_center_range.hi);
  return s;
}

inline DistortionSpec zero_distortion_spec(const SynthConfig& config) {
  DistortionSpec s;
  s.blur_sigma = 0.0;
  s.occlusion_fraction = 0.0;
  s.exposure_gain = 1.0;
  s.dilation_target = config.dilation_ideal;
  s.off_center_px = 0.0;
  return s;
}

/// Writes the full synthetic dataset: images, masks, and the manifest.
/// Sample 0 of each class is the zero-distortion enrollment. The result is a
/// pure function of the config.
inline std::vector<SampleRecord> gen_dataset(const SynthConfig& config,
                                             const std::filesystem::path& out_dir) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "masks", ec);
  if (ec) throw IoError("cannot create dataset directories under " + out_dir.string());

  const std::vector<ClassPrototype> protos = gen_class_table(config, config.n_classes - 1);
  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(config.n_classes) * config.samples_per_class);

  for (const ClassPrototype& proto : protos) {
    for (int s = 0; s < config.samples_per_class; ++s) {
      const bool enrollment = s == 0;
      const DistortionSpec spec =
          enrollment ? zero_distortion_spec(config) : draw_spec(config, proto.class_index, s);
      SynthSample sample = gen_sample(config, proto, spec, s);

      const std::string name = synth_detail::sample_name(proto.class_index, s);
      const std::string image_rel = "images/" + name + ".pgm";
      const std::string mask_rel = "masks/" + name + ".pgm";
      write_image(sample.image, out_dir / image_rel);
      write_mask(sample.mask, out_dir / mask_rel);

      records.emplace_back(name, proto.class_id, image_rel, sample.geometry, mask_rel,
                           sample.embedding, enrollment);
    }
  }
  save_manifest(records, out_dir / "manifest.jsonl");
  return records;
}

}  // namespace irisqa
