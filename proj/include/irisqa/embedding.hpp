#pragma once

#include <cmath>
#include <vector>

#include "irisqa/errors.hpp"

namespace irisqa {

/// Unit-norm real vector produced by a recognition algorithm. Normalized at
/// construction, so cosine similarity reduces to a plain dot product.
class Embedding {
 public:
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("Embedding: empty vector");
    double sq = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValidationError("Embedding: non-finite component");
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) throw ValidationError("Embedding: zero vector cannot be normalized");
    // skip the divide when already unit, so construction is idempotent and
    // save/load round trips preserve the exact component values
    if (std::abs(norm - 1.0) > 1e-9)
      for (double& v : values_) v /= norm;
  }

  int dim() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

inline double norm_of(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace irisqa
