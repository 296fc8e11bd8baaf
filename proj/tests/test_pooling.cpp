#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "irisqa/predictor.hpp"
#include "irisqa/rng.hpp"

using namespace irisqa;

namespace {

FeatureMap random_features(int w, int h, int c, Rng& rng) {
  FeatureMap f(w, h, c);
  for (double& v : f.values) v = rng.uniform(-5.0, 5.0);
  return f;
}

RealGrid random_heatmap(int w, int h, Rng& rng) {
  RealGrid g(w, h);
  for (double& v : g.values) v = rng.uniform(0.01, 1.0);
  return g;
}

// plain double-loop expansion of the weighted-average definition
std::vector<double> pool_oracle(const FeatureMap& f, const RealGrid& h) {
  std::vector<double> q(f.channels, 0.0);
  double denom = 0.0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) denom += h.at(x, y);
  for (int z = 0; z < f.channels; ++z) {
    double num = 0.0;
    for (int y = 0; y < f.height; ++y)
      for (int x = 0; x < f.width; ++x) num += h.at(x, y) * f.at(x, y, z);
    q[z] = num / denom;
  }
  return q;
}

}  // namespace

TEST_CASE("uniform heatmap reduces pooling to the spatial mean") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 2 + static_cast<int>(rng.next_below(10));
    const int h = 2 + static_cast<int>(rng.next_below(10));
    const int c = 1 + static_cast<int>(rng.next_below(6));
    const FeatureMap f = random_features(w, h, c, rng);
    const RealGrid uniform(w, h, 1.0);
    const std::vector<double> pooled = attention_pool(f, uniform);
    for (int z = 0; z < c; ++z) {
      double mean = 0.0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mean += f.at(x, y, z);
      mean /= static_cast<double>(w) * h;
      CHECK(std::abs(pooled[z] - mean) <= 1e-6 * std::max(1.0, std::abs(mean)));
    }
  }
}

TEST_CASE("one-hot heatmap selects a single spatial location") {
  Rng rng(102);
  const FeatureMap f = random_features(5, 4, 3, rng);
  RealGrid onehot(5, 4, 0.0);
  onehot.at(3, 2) = 1.0;
  const std::vector<double> pooled = attention_pool(f, onehot);
  for (int z = 0; z < 3; ++z) CHECK(pooled[z] == Catch::Approx(f.at(3, 2, z)).margin(1e-15));
}

TEST_CASE("hand-expanded 2x2 example pools to 3.25") {
  FeatureMap f(2, 2, 1);
  f.at(0, 0, 0) = 1.0;
  f.at(1, 0, 0) = 2.0;
  f.at(0, 1, 0) = 3.0;
  f.at(1, 1, 0) = 4.0;
  RealGrid h(2, 2, 0.0);
  h.at(0, 0) = 1.0;
  h.at(1, 1) = 3.0;
  const std::vector<double> pooled = attention_pool(f, h);
  CHECK(pooled[0] == Catch::Approx(3.25).margin(1e-15));
  CHECK(pooled == pool_oracle(f, h));
}

TEST_CASE("pooling matches the brute-force oracle on random tensors") {
  Rng rng(103);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 2 + static_cast<int>(rng.next_below(8));
    const int h = 2 + static_cast<int>(rng.next_below(8));
    const int c = 1 + static_cast<int>(rng.next_below(5));
    const FeatureMap f = random_features(w, h, c, rng);
    const RealGrid heat = random_heatmap(w, h, rng);
    const std::vector<double> got = attention_pool(f, heat);
    const std::vector<double> want = pool_oracle(f, heat);
    for (int z = 0; z < c; ++z)
      CHECK(std::abs(got[z] - want[z]) <= 1e-12 * std::max(1.0, std::abs(want[z])));
  }
}

TEST_CASE("pooling is invariant under positive heatmap scaling") {
  Rng rng(104);
  const FeatureMap f = random_features(7, 6, 4, rng);
  const RealGrid heat = random_heatmap(7, 6, rng);
  const std::vector<double> base = attention_pool(f, heat);
  for (double k : {0.1, 1.0, 10.0}) {
    RealGrid scaled = heat;
    for (double& v : scaled.values) v *= k;
    const std::vector<double> got = attention_pool(f, scaled);
    for (int z = 0; z < 4; ++z)
      CHECK(std::abs(got[z] - base[z]) <= 1e-6 * std::max(1.0, std::abs(base[z])));
  }
}

TEST_CASE("pooling rejects mismatched dimensions and all-zero heatmaps") {
  Rng rng(105);
  const FeatureMap f = random_features(4, 4, 2, rng);
  CHECK_THROWS_AS(attention_pool(f, RealGrid(5, 4, 1.0)), ValidationError);
  CHECK_THROWS_AS(attention_pool(f, RealGrid(4, 4, 0.0)), ValidationError);
}
