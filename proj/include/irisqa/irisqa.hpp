#pragma once

// Recognition-oriented iris image quality assessment: hand-crafted quality
// factors, feature-space-distance quality labels, an attention-pooled
// trainable predictor, and the IRR-EER evaluation protocol, plus a seeded
// synthetic dataset generator for desk-scale verification.

#include "irisqa/dfs.hpp"
#include "irisqa/embedding.hpp"
#include "irisqa/errors.hpp"
#include "irisqa/factors.hpp"
#include "irisqa/fsio.hpp"
#include "irisqa/geometry.hpp"
#include "irisqa/image.hpp"
#include "irisqa/manifest.hpp"
#include "irisqa/metrics.hpp"
#include "irisqa/nn.hpp"
#include "irisqa/parallel.hpp"
#include "irisqa/pgm.hpp"
#include "irisqa/predictor.hpp"
#include "irisqa/rng.hpp"
#include "irisqa/synth.hpp"

namespace irisqa {
inline constexpr const char* kVersion = "1.0.0";
}
