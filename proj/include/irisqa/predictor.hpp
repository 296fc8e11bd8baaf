#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "irisqa/errors.hpp"
#include "irisqa/geometry.hpp"
#include "irisqa/image.hpp"
#include "irisqa/manifest.hpp"
#include "irisqa/nn.hpp"
#include "irisqa/pgm.hpp"
#include "irisqa/rng.hpp"

namespace irisqa {

constexpr int kDownsampleFactor = 4;  // 640x480 input -> 160x120 heatmap

/// Encoder channel widths. Three stages: two stride-2 stages reach 1/4
/// resolution, the third refines at that scale.
struct ModelConfig {
  int c1 = 8;
  int c2 = 16;
  int c3 = 24;

  void validate() const {
    if (c1 < 1 || c2 < 1 || c3 < 1) throw ValidationError("ModelConfig: channels must be >= 1");
  }
};

/// All trainable weights: encoder stages, 1x1 heatmap head, and the linear
/// regression head over the pooled quality vector.
struct ModelParams {
  ModelConfig config;
  ConvLayer enc1, enc2, enc3;
  std::vector<double> head_w;  // c3 -> 1, 1x1 convolution
  double head_b = 0.0;
  std::vector<double> reg_w;  // c3
  double reg_b = 0.0;

  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    Rng rng = Rng::stream(seed, {0x1717});
    p.enc1 = ConvLayer::glorot(1, cfg.c1, 2, rng);
    p.enc2 = ConvLayer::glorot(cfg.c1, cfg.c2, 2, rng);
    p.enc3 = ConvLayer::glorot(cfg.c2, cfg.c3, 1, rng);
    const double a_head = std::sqrt(6.0 / (cfg.c3 + 1.0));
    p.head_w.resize(cfg.c3);
    for (double& v : p.head_w) v = rng.uniform(-a_head, a_head);
    p.reg_w.resize(cfg.c3);
    for (double& v : p.reg_w) v = rng.uniform(-a_head, a_head);
    return p;
  }

  static ModelParams zeros_like(const ModelParams& other) {
    ModelParams p;
    p.config = other.config;
    p.enc1 = ConvLayer::zeros_like(other.enc1);
    p.enc2 = ConvLayer::zeros_like(other.enc2);
    p.enc3 = ConvLayer::zeros_like(other.enc3);
    p.head_w.assign(other.head_w.size(), 0.0);
    p.reg_w.assign(other.reg_w.size(), 0.0);
    return p;
  }

  /// Visits every parameter array in a fixed order (also the checkpoint and
  /// optimizer-state order).
  template <typename Fn>
  void for_each_array(Fn&& fn) {
    fn(enc1.w.data(), enc1.w.size());
    fn(enc1.b.data(), enc1.b.size());
    fn(enc2.w.data(), enc2.w.size());
    fn(enc2.b.data(), enc2.b.size());
    fn(enc3.w.data(), enc3.w.size());
    fn(enc3.b.data(), enc3.b.size());
    fn(head_w.data(), head_w.size());
    fn(&head_b, std::size_t{1});
    fn(reg_w.data(), reg_w.size());
    fn(&reg_b, std::size_t{1});
  }
  template <typename Fn>
  void for_each_array(Fn&& fn) const {
    const_cast<ModelParams*>(this)->for_each_array(
        [&](double* data, std::size_t n) { fn(static_cast<const double*>(data), n); });
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for_each_array([&](const double*, std::size_t k) { n += k; });
    return n;
  }

  void validate_finite() const {
    bool ok = true;
    for_each_array([&](const double* data, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) ok = ok && std::isfinite(data[i]);
    });
    if (!ok) throw NumericError("ModelParams: non-finite parameter");
  }
};

struct TrainConfig {
  double lambda0 = 0.8;
  int lambda_halving_period = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_epsilon = 1e-8;  // not in the training recipe; standard default
  double lr0 = 4e-4;
  int lr_halvings = 4;
  int epochs = 100;
  int batch_size = 8;
  std::uint64_t seed = 0;
  ModelConfig model;

  void validate() const {
    if (!(lambda0 > 0.0 && lambda0 < 1.0)) throw ValidationError("TrainConfig: lambda0 in (0,1)");
    if (lambda_halving_period < 1) throw ValidationError("TrainConfig: halving period >= 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
      throw ValidationError("TrainConfig: betas in (0,1)");
    if (!(lr0 > 0.0)) throw ValidationError("TrainConfig: lr0 > 0");
    if (lr_halvings < 0) throw ValidationError("TrainConfig: lr_halvings >= 0");
    if (epochs < 1) throw ValidationError("TrainConfig: epochs >= 1");
    if (batch_size < 1) throw ValidationError("TrainConfig: batch_size >= 1");
    model.validate();
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lambda0", c.lambda0},
                     {"lambda_halving_period", c.lambda_halving_period},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_epsilon", c.adam_epsilon},
                     {"lr0", c.lr0},
                     {"lr_halvings", c.lr_halvings},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed},
                     {"channels", {c.model.c1, c.model.c2, c.model.c3}}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  if (j.contains("lambda0")) j.at("lambda0").get_to(c.lambda0);
  if (j.contains("lambda_halving_period")) j.at("lambda_halving_period").get_to(c.lambda_halving_period);
  if (j.contains("adam_beta1")) j.at("adam_beta1").get_to(c.adam_beta1);
  if (j.contains("adam_beta2")) j.at("adam_beta2").get_to(c.adam_beta2);
  if (j.contains("adam_epsilon")) j.at("adam_epsilon").get_to(c.adam_epsilon);
  if (j.contains("lr0")) j.at("lr0").get_to(c.lr0);
  if (j.contains("lr_halvings")) j.at("lr_halvings").get_to(c.lr_halvings);
  if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("channels")) {
    const auto& ch = j.at("channels");
    c.model.c1 = ch.at(0).get<int>();
    c.model.c2 = ch.at(1).get<int>();
    c.model.c3 = ch.at(2).get<int>();
  }
  c.validate();
}

struct Prediction {
  double quality = 0.0;  // strictly in (0, 1)
  RealGrid heatmap;      // 1/4 input resolution, per-cell sigmoid output
};

/// Heatmap-weighted per-channel spatial average: Q(z) = sum H*F / sum H.
inline std::vector<double> attention_pool(const FeatureMap& features, const RealGrid& heatmap) {
  if (features.width != heatmap.width || features.height != heatmap.height)
    throw ValidationError("attention_pool: spatial dimension mismatch");
  double weight_sum = 0.0;
  for (double h : heatmap.values) {
    if (!std::isfinite(h)) throw ValidationError("attention_pool: non-finite heatmap value");
    weight_sum += h;
  }
  if (!(weight_sum > 0.0)) throw ValidationError("attention_pool: heatmap sum must be positive");
  std::vector<double> pooled(features.channels, 0.0);
  for (int y = 0; y < features.height; ++y)
    for (int x = 0; x < features.width; ++x) {
      const double h = heatmap.at(x, y);
      for (int z = 0; z < features.channels; ++z) pooled[z] += h * features.at(x, y, z);
    }
  for (double& q : pooled) q /= weight_sum;
  return pooled;
}

/// Forward activations cached for backprop.
struct ForwardCache {
  FeatureMap input;          // 1-channel, intensities scaled to [0, 1]
  FeatureMap z1, a1, z2, a2, z3, a3;
  RealGrid heat_logits;
  RealGrid heatmap;
  std::vector<double> pooled;
  double quality_logit = 0.0;
  double quality = 0.0;

  Prediction prediction() const { return Prediction{quality, heatmap}; }
};

inline ForwardCache forward(const ModelParams& params, const GrayImage& image) {
  image.validate_min_size();
  if (image.width % kDownsampleFactor != 0 || image.height % kDownsampleFactor != 0)
    throw ValidationError("forward: image dimensions must be divisible by " +
                          std::to_string(kDownsampleFactor));
  ForwardCache c;
  c.input = FeatureMap(image.width, image.height, 1);
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    c.input.values[i] = image.pixels[i] / 255.0;

  c.z1 = conv3x3_forward(params.enc1, c.input);
  c.a1 = relu_forward(c.z1);
  c.z2 = conv3x3_forward(params.enc2, c.a1);
  c.a2 = relu_forward(c.z2);
  c.z3 = conv3x3_forward(params.enc3, c.a2);
  c.a3 = relu_forward(c.z3);

  c.heat_logits = RealGrid(c.a3.width, c.a3.height);
  c.heatmap = RealGrid(c.a3.width, c.a3.height);
  for (int y = 0; y < c.a3.height; ++y)
    for (int x = 0; x < c.a3.width; ++x) {
      double acc = params.head_b;
      for (int z = 0; z < c.a3.channels; ++z) acc += params.head_w[z] * c.a3.at(x, y, z);
      c.heat_logits.at(x, y) = acc;
      c.heatmap.at(x, y) = sigmoid(acc);
    }

  c.pooled = attention_pool(c.a3, c.heatmap);
  c.quality_logit = params.reg_b;
  for (int z = 0; z < c.a3.channels; ++z) c.quality_logit += params.reg_w[z] * c.pooled[z];
  c.quality = sigmoid(c.quality_logit);
  return c;
}

struct LossBreakdown {
  double total = 0.0;
  double mask = 0.0;  // mean per-cell binary cross-entropy
  double dfs = 0.0;   // squared error on the scalar quality
};

/// Composite loss value from a finished prediction; no gradients.
inline LossBreakdown loss_value(const Prediction& pred, double dfs_target,
                                const RealGrid& mask_target, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw ValidationError("loss: lambda must be in [0, 1]");
  if (pred.heatmap.width != mask_target.width || pred.heatmap.height != mask_target.height)
    throw ValidationError("loss: heatmap and mask target dimensions differ");
  LossBreakdown lb;
  const std::size_t n = pred.heatmap.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = pred.heatmap.values[i];
    const double t = mask_target.values[i];
    // 0*log(0) := 0 at matching hard labels
    double cell;
    if (t == 1.0) cell = p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
    else if (t == 0.0) cell = p < 1.0 ? -std::log1p(-p) : std::numeric_limits<double>::infinity();
    else cell = -(t * std::log(p) + (1.0 - t) * std::log1p(-p));
    lb.mask += cell;
  }
  lb.mask /= static_cast<double>(n);
  lb.dfs = (pred.quality - dfs_target) * (pred.quality - dfs_target);
  lb.total = lambda * lb.mask + (1.0 - lambda) * lb.dfs;
  return lb;
}

/// Composite loss with exact analytic gradients w.r.t. every parameter.
/// Gradient flows into the heatmap head from both the mask loss and the
/// attention-pooling path of the quality loss.
inline LossBreakdown backward(const ModelParams& params, const ForwardCache& c,
                              double dfs_target, const RealGrid& mask_target, double lambda,
                              ModelParams& grads) {
  if (lambda < 0.0 || lambda > 1.0) throw ValidationError("loss: lambda must be in [0, 1]");
  if (c.heatmap.width != mask_target.width || c.heatmap.height != mask_target.height)
    throw ValidationError("loss: heatmap and mask target dimensions differ");

  const int hw = c.heatmap.width, hh = c.heatmap.height, ch = c.a3.channels;
  const double ncells = static_cast<double>(hw) * hh;

  LossBreakdown lb;
  for (int y = 0; y < hh; ++y)
    for (int x = 0; x < hw; ++x)
      lb.mask += bce_from_logit(c.heat_logits.at(x, y), mask_target.at(x, y));
  lb.mask /= ncells;
  lb.dfs = (c.quality - dfs_target) * (c.quality - dfs_target);
  lb.total = lambda * lb.mask + (1.0 - lambda) * lb.dfs;

  // quality head
  const double dL_dq = (1.0 - lambda) * 2.0 * (c.quality - dfs_target);
  const double dL_du = dL_dq * c.quality * (1.0 - c.quality);
  for (int z = 0; z < ch; ++z) grads.reg_w[z] += dL_du * c.pooled[z];
  grads.reg_b += dL_du;

  std::vector<double> dL_dQ(ch);
  for (int z = 0; z < ch; ++z) dL_dQ[z] = dL_du * params.reg_w[z];

  // attention pooling: Q(z) = sum H*F / sum H
  double weight_sum = 0.0;
  for (double h : c.heatmap.values) weight_sum += h;

  FeatureMap dL_dF(c.a3.width, c.a3.height, ch);
  RealGrid dL_dH(hw, hh);
  for (int y = 0; y < hh; ++y)
    for (int x = 0; x < hw; ++x) {
      const double h = c.heatmap.at(x, y);
      double dh = 0.0;
      for (int z = 0; z < ch; ++z) {
        dL_dF.at(x, y, z) += dL_dQ[z] * h / weight_sum;
        dh += dL_dQ[z] * (c.a3.at(x, y, z) - c.pooled[z]) / weight_sum;
      }
      dL_dH.at(x, y) = dh;
    }

  // heatmap logits: mask BCE plus the pooling path through the sigmoid
  RealGrid dL_dlogit(hw, hh);
  for (int y = 0; y < hh; ++y)
    for (int x = 0; x < hw; ++x) {
      const double p = c.heatmap.at(x, y);
      dL_dlogit.at(x, y) =
          lambda * (p - mask_target.at(x, y)) / ncells + dL_dH.at(x, y) * p * (1.0 - p);
    }

  // 1x1 head back into F
  for (int y = 0; y < hh; ++y)
    for (int x = 0; x < hw; ++x) {
      const double g = dL_dlogit.at(x, y);
      grads.head_b += g;
      for (int z = 0; z < ch; ++z) {
        grads.head_w[z] += g * c.a3.at(x, y, z);
        dL_dF.at(x, y, z) += g * params.head_w[z];
      }
    }

  // encoder
  FeatureMap g3 = relu_backward(c.z3, dL_dF);
  FeatureMap g_a2 = conv3x3_backward(params.enc3, c.a2, g3, grads.enc3);
  FeatureMap g2 = relu_backward(c.z2, g_a2);
  FeatureMap g_a1 = conv3x3_backward(params.enc2, c.a1, g2, grads.enc2);
  FeatureMap g1 = relu_backward(c.z1, g_a1);
  conv3x3_backward(params.enc1, c.input, g1, grads.enc1);
  return lb;
}

/// lambda = lambda0 / 2^floor(epoch / period): halved every 50 epochs by default.
inline double anneal_lambda(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw ValidationError("anneal_lambda: epoch must be >= 0");
  return config.lambda0 / std::exp2(static_cast<double>(epoch / config.lambda_halving_period));
}

/// Learning rate with lr_halvings evenly spaced halvings across the run.
inline double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw ValidationError("lr_schedule: epoch must be >= 0");
  const long k = std::min<long>(
      config.lr_halvings,
      static_cast<long>(epoch) * (config.lr_halvings + 1) / config.epochs);
  return config.lr0 / std::exp2(static_cast<double>(k));
}

struct AdamState {
  std::vector<double> m, v;
  long step = 0;

  static AdamState for_params(const ModelParams& params) {
    AdamState s;
    s.m.assign(params.param_count(), 0.0);
    s.v.assign(params.param_count(), 0.0);
    return s;
  }
};

/// Standard Adam update with bias correction. Aborts on non-finite gradients.
inline void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
                      double lr, const TrainConfig& config) {
  grads.for_each_array([&](const double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(g[i]))
        throw NumericError("adam_step: non-finite gradient encountered; training aborted");
  });
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
  std::size_t off = 0;
  const ModelParams& cg = grads;
  std::vector<std::pair<const double*, std::size_t>> garrs;
  cg.for_each_array([&](const double* g, std::size_t n) { garrs.emplace_back(g, n); });
  std::size_t ai = 0;
  params.for_each_array([&](double* p, std::size_t n) {
    const double* g = garrs[ai].first;
    for (std::size_t i = 0; i < n; ++i) {
      double& m = state.m[off + i];
      double& v = state.v[off + i];
      m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g[i];
      v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g[i] * g[i];
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_epsilon);
    }
    off += n;
    ++ai;
  });
}

struct TrainSample {
  GrayImage image;
  RealGrid mask_target;  // 1/4 resolution, values in {0, 1}
  double dfs = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double lambda = 0.0;
  double lr = 0.0;
  double loss = 0.0;       // epoch mean of per-sample composite losses
  double mask_loss = 0.0;
  double dfs_loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

/// Single-threaded mini-batch training; bit-deterministic for a fixed seed.
inline TrainResult train(const std::vector<TrainSample>& samples, const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw ValidationError("train: empty dataset");
  for (const TrainSample& s : samples) {
    if (s.image.width / kDownsampleFactor != s.mask_target.width ||
        s.image.height / kDownsampleFactor != s.mask_target.height)
      throw ValidationError("train: mask target must be at 1/4 image resolution");
    if (!(s.dfs >= 0.0 && s.dfs <= 1.0)) throw ValidationError("train: dfs label out of [0, 1]");
  }

  TrainResult result;
  result.params = ModelParams::init(config.model, config.seed);
  AdamState state = AdamState::for_params(result.params);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lambda = anneal_lambda(epoch, config);
    const double lr = lr_schedule(epoch, config);
    Rng shuffler = Rng::stream(config.seed, {0xE90C5, static_cast<std::uint64_t>(epoch)});
    shuffler.shuffle(order);

    double epoch_loss = 0.0, epoch_mask = 0.0, epoch_dfs = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      ModelParams grads = ModelParams::zeros_like(result.params);
      for (std::size_t i = start; i < end; ++i) {
        const TrainSample& s = samples[order[i]];
        ForwardCache cache = forward(result.params, s.image);
        LossBreakdown lb = backward(result.params, cache, s.dfs, s.mask_target, lambda, grads);
        epoch_loss += lb.total;
        epoch_mask += lb.mask;
        epoch_dfs += lb.dfs;
      }
      const double inv = 1.0 / static_cast<double>(end - start);  // batch mean
      grads.for_each_array([&](double* g, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) g[i] *= inv;
      });
      adam_step(result.params, grads, state, lr, config);
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    result.log.push_back(EpochLog{epoch, lambda, lr, epoch_loss * inv_n, epoch_mask * inv_n,
                                  epoch_dfs * inv_n});
  }
  result.params.validate_finite();
  return result;
}

/// Forward pass without gradient bookkeeping.
inline Prediction predict(const ModelParams& params, const GrayImage& image) {
  return forward(params, image).prediction();
}

inline Prediction predict(const ModelParams& params, const GrayImage& image,
                          SampleRecord& record) {
  Prediction p = predict(params, image);
  record.predicted_quality = p.quality;
  return p;
}

// --- checkpoint container: magic, channel config, then raw parameter arrays
//     in for_each_array order. Round trip is bit-exact.

constexpr char kCheckpointMagic[8] = {'I', 'Q', 'A', 'C', 'K', 'P', 'T', '1'};

inline void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  auto put_i32 = [&](std::int32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
  put_i32(params.config.c1);
  put_i32(params.config.c2);
  put_i32(params.config.c3);
  params.for_each_array([&](const double* data, std::size_t n) {
    const std::uint64_t count = n;
    out.append(reinterpret_cast<const char*>(&count), 8);
    out.append(reinterpret_cast<const char*>(data), n * sizeof(double));
  });
  atomic_write_file(path, out);
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such checkpoint: " + path.string());
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (data.size() - pos < n) throw ValidationError("checkpoint truncated: " + path.string());
  };
  need(sizeof(kCheckpointMagic));
  if (std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw ValidationError("not a model checkpoint: " + path.string());
  pos = sizeof(kCheckpointMagic);
  auto get_i32 = [&]() {
    need(4);
    std::int32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  };
  ModelConfig cfg;
  cfg.c1 = get_i32();
  cfg.c2 = get_i32();
  cfg.c3 = get_i32();
  ModelParams params = ModelParams::init(cfg, 0);
  params.for_each_array([&](double* dst, std::size_t n) {
    need(8);
    std::uint64_t count;
    std::memcpy(&count, data.data() + pos, 8);
    pos += 8;
    if (count != n) throw ValidationError("checkpoint array size mismatch: " + path.string());
    need(n * sizeof(double));
    std::memcpy(dst, data.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
  });
  params.validate_finite();
  return params;
}

/// Builds training samples from labeled records: loads each image and mask,
/// downsamples the mask to the heatmap resolution.
inline std::vector<TrainSample> make_train_samples(const std::vector<SampleRecord>& records,
                                                   const std::filesystem::path& manifest_path) {
  std::vector<TrainSample> out;
  out.reserve(records.size());
  for (const SampleRecord& r : records) {
    if (!r.dfs_label)
      throw ValidationError("train: record " + r.sample_id + " has no dfs_label; run label first");
    TrainSample s;
    s.image = read_image(resolve_against(manifest_path, r.image_path));
    OcclusionMask mask = read_mask(resolve_against(manifest_path, r.occlusion_path));
    if (mask.width != s.image.width || mask.height != s.image.height)
      throw ValidationError("train: mask dimensions do not match image for " + r.sample_id);
    s.mask_target = downsample_mask_majority(mask, kDownsampleFactor);
    s.dfs = *r.dfs_label;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace irisqa
