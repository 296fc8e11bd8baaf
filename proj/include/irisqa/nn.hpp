#pragma once

#include <cmath>
#include <vector>

#include "irisqa/errors.hpp"
#include "irisqa/image.hpp"
#include "irisqa/rng.hpp"

namespace irisqa {

/// 3x3 convolution with zero padding 1 and configurable stride.
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  int stride = 1;
  std::vector<double> w;  // [out][in][ky][kx]
  std::vector<double> b;  // [out]

  static ConvLayer glorot(int in_ch, int out_ch, int stride, Rng& rng) {
    ConvLayer l;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.stride = stride;
    l.w.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
    l.b.assign(out_ch, 0.0);
    const double a = std::sqrt(6.0 / (in_ch * 9.0 + out_ch * 9.0));
    for (double& v : l.w) v = rng.uniform(-a, a);
    return l;
  }

  static ConvLayer zeros_like(const ConvLayer& other) {
    ConvLayer l;
    l.in_ch = other.in_ch;
    l.out_ch = other.out_ch;
    l.stride = other.stride;
    l.w.assign(other.w.size(), 0.0);
    l.b.assign(other.b.size(), 0.0);
    return l;
  }

  std::size_t widx(int oc, int ic, int ky, int kx) const {
    return ((static_cast<std::size_t>(oc) * in_ch + ic) * 3 + ky) * 3 + kx;
  }
};

inline FeatureMap conv3x3_forward(const ConvLayer& l, const FeatureMap& in) {
  if (in.channels != l.in_ch) throw ValidationError("conv: input channel mismatch");
  const int ow = (in.width + 2 - 3) / l.stride + 1;
  const int oh = (in.height + 2 - 3) / l.stride + 1;
  FeatureMap out(ow, oh, l.out_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const int iy0 = oy * l.stride - 1;
      const int ix0 = ox * l.stride - 1;
      for (int oc = 0; oc < l.out_ch; ++oc) {
        double acc = l.b[oc];
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ix0 + kx;
            if (ix < 0 || ix >= in.width) continue;
            for (int ic = 0; ic < l.in_ch; ++ic)
              acc += l.w[l.widx(oc, ic, ky, kx)] * in.at(ix, iy, ic);
          }
        }
        out.at(ox, oy, oc) = acc;
      }
    }
  }
  return out;
}

/// Accumulates weight/bias gradients into grad_l and returns the gradient
/// w.r.t. the layer input.
inline FeatureMap conv3x3_backward(const ConvLayer& l, const FeatureMap& in,
                                   const FeatureMap& grad_out, ConvLayer& grad_l) {
  FeatureMap grad_in(in.width, in.height, in.channels);
  for (int oy = 0; oy < grad_out.height; ++oy) {
    for (int ox = 0; ox < grad_out.width; ++ox) {
      const int iy0 = oy * l.stride - 1;
      const int ix0 = ox * l.stride - 1;
      for (int oc = 0; oc < l.out_ch; ++oc) {
        const double g = grad_out.at(ox, oy, oc);
        if (g == 0.0) continue;
        grad_l.b[oc] += g;
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ix0 + kx;
            if (ix < 0 || ix >= in.width) continue;
            for (int ic = 0; ic < l.in_ch; ++ic) {
              grad_l.w[l.widx(oc, ic, ky, kx)] += g * in.at(ix, iy, ic);
              grad_in.at(ix, iy, ic) += g * l.w[l.widx(oc, ic, ky, kx)];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

inline FeatureMap relu_forward(const FeatureMap& in) {
  FeatureMap out = in;
  for (double& v : out.values) v = v > 0.0 ? v : 0.0;
  return out;
}

inline FeatureMap relu_backward(const FeatureMap& pre, const FeatureMap& grad_out) {
  FeatureMap grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.values.size(); ++i)
    if (pre.values[i] <= 0.0) grad_in.values[i] = 0.0;
  return grad_in;
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Binary cross-entropy from the pre-sigmoid logit; numerically stable for
/// any logit magnitude.
inline double bce_from_logit(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace irisqa
