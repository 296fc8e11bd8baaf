#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "irisqa/dfs.hpp"
#include "irisqa/errors.hpp"
#include "irisqa/manifest.hpp"

namespace irisqa {

struct ScorePairs {
  std::vector<double> genuine;   // probe vs same-class enrollment
  std::vector<double> impostor;  // probe vs other-class enrollments
};

struct FarFrr {
  double far = 0.0;
  double frr = 0.0;
};

/// Accept iff score >= threshold. far = accepted impostors, frr = rejected
/// genuines.
inline FarFrr far_frr(const ScorePairs& pairs, double threshold) {
  if (pairs.genuine.empty() || pairs.impostor.empty())
    throw ValidationError("far_frr: both genuine and impostor scores are required");
  std::size_t fa = 0, fr = 0;
  for (double s : pairs.impostor)
    if (s >= threshold) ++fa;
  for (double s : pairs.genuine)
    if (s < threshold) ++fr;
  return FarFrr{static_cast<double>(fa) / pairs.impostor.size(),
                static_cast<double>(fr) / pairs.genuine.size()};
}

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  bool degenerate = false;  // all scores identical
};

/// Equal error rate: sweeps the distinct score values, locates the sign
/// change of far - frr, and linearly interpolates both rates to the crossing.
inline EerResult eer(const ScorePairs& pairs) {
  if (pairs.genuine.empty() || pairs.impostor.empty())
    throw ValidationError("eer: both genuine and impostor scores are required");
  for (double s : pairs.genuine)
    if (!std::isfinite(s)) throw ValidationError("eer: non-finite genuine score");
  for (double s : pairs.impostor)
    if (!std::isfinite(s)) throw ValidationError("eer: non-finite impostor score");

  std::vector<double> thresholds;
  thresholds.reserve(pairs.genuine.size() + pairs.impostor.size() + 1);
  thresholds.insert(thresholds.end(), pairs.genuine.begin(), pairs.genuine.end());
  thresholds.insert(thresholds.end(), pairs.impostor.begin(), pairs.impostor.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const bool degenerate = thresholds.size() == 1;
  thresholds.push_back(thresholds.back() + 1.0);  // sentinel: far = 0, frr = 1

  FarFrr prev = far_frr(pairs, thresholds[0]);  // far = 1, frr = 0 at the minimum
  if (prev.far == prev.frr) return EerResult{prev.far, thresholds[0], degenerate};
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    const FarFrr cur = far_frr(pairs, thresholds[i]);
    if (cur.far == cur.frr) return EerResult{cur.far, thresholds[i], degenerate};
    const double d_prev = prev.far - prev.frr;
    const double d_cur = cur.far - cur.frr;
    if (d_prev > 0.0 && d_cur < 0.0) {
      const double s = d_prev / (d_prev - d_cur);
      const double value = prev.far + s * (cur.far - prev.far);
      const double threshold = thresholds[i - 1] + s * (thresholds[i] - thresholds[i - 1]);
      return EerResult{value, threshold, degenerate};
    }
    prev = cur;
  }
  throw NumericError("eer: no far/frr crossing found");  // unreachable: sentinel guarantees one
}

/// Image rejection rate: discarded / total.
inline double irr(std::size_t discarded, std::size_t total) {
  if (total == 0) throw ValidationError("irr: total must be positive");
  if (discarded > total) throw ValidationError("irr: discarded exceeds total");
  return static_cast<double>(discarded) / static_cast<double>(total);
}

struct CurvePoint {
  double irr = 0.0;
  double eer = 0.0;
  double threshold = 0.0;  // quality cut (or band half-width for band gating)
};

struct IrrEerCurve {
  std::vector<CurvePoint> points;  // irr strictly increasing
  bool truncated = false;
  std::string note;
};

/// Precomputed verification scores: one genuine score per probe plus its
/// impostor scores against every other enrollment, paired with the probe's
/// quality value for gating.
struct VerificationSet {
  std::vector<double> quality;
  std::vector<double> genuine;
  std::vector<std::vector<double>> impostor;

  std::size_t probes() const { return quality.size(); }

  ScorePairs surviving(const std::vector<bool>& keep) const {
    ScorePairs pairs;
    for (std::size_t i = 0; i < quality.size(); ++i) {
      if (!keep[i]) continue;
      pairs.genuine.push_back(genuine[i]);
      pairs.impostor.insert(pairs.impostor.end(), impostor[i].begin(), impostor[i].end());
    }
    return pairs;
  }
};

/// Pairs every non-enrollment record with its class enrollment (genuine) and
/// all other enrollments (impostor). `quality_of` supplies the gating value
/// for each probe record.
inline VerificationSet build_verification_set(
    const std::vector<SampleRecord>& records,
    const std::function<double(const SampleRecord&)>& quality_of) {
  std::map<std::string, const SampleRecord*> enrollment;
  for (const SampleRecord& r : records)
    if (r.is_enrollment && !enrollment.emplace(r.class_id, &r).second)
      throw ValidationError("class " + r.class_id + " has multiple enrollment records");
  if (enrollment.size() < 2)
    throw ValidationError("verification requires at least 2 classes with enrollments");

  VerificationSet set;
  for (const SampleRecord& r : records) {
    if (r.is_enrollment) continue;
    auto own = enrollment.find(r.class_id);
    if (own == enrollment.end())
      throw ValidationError("class " + r.class_id + " has no enrollment record");
    const double q = quality_of(r);
    if (!std::isfinite(q))
      throw ValidationError("record " + r.sample_id + ": non-finite quality value");
    set.quality.push_back(q);
    set.genuine.push_back(match_score(r.embedding, own->second->embedding));
    std::vector<double> imp;
    for (const auto& [cls, enr] : enrollment)
      if (cls != r.class_id) imp.push_back(match_score(r.embedding, enr->embedding));
    set.impostor.push_back(std::move(imp));
  }
  if (set.quality.empty()) throw ValidationError("no probe records to evaluate");
  return set;
}

/// Sweeps the quality threshold over quantiles of the probe quality values so
/// the rejection rate walks from 0 toward 1. Enrollments are never discarded;
/// the sweep stops before the last probe would be dropped.
inline IrrEerCurve irr_eer_curve(const VerificationSet& set, int steps) {
  if (steps < 2) throw ValidationError("irr_eer_curve: steps must be >= 2");
  const std::size_t n = set.probes();
  std::vector<double> sorted_q = set.quality;
  std::sort(sorted_q.begin(), sorted_q.end());

  IrrEerCurve curve;
  double last_irr = -1.0;
  for (int i = 0; i < steps; ++i) {
    const std::size_t target =
        static_cast<std::size_t>(std::llround(static_cast<double>(i) * (n - 1) / (steps - 1)));
    const double threshold = sorted_q[target];  // discards quality < threshold
    std::vector<bool> keep(n);
    std::size_t discarded = 0;
    for (std::size_t j = 0; j < n; ++j) {
      keep[j] = set.quality[j] >= threshold;
      if (!keep[j]) ++discarded;
    }
    const double rate = irr(discarded, n);
    if (rate <= last_irr) continue;  // quantile ties collapse to one point
    const ScorePairs pairs = set.surviving(keep);
    if (pairs.genuine.empty() || pairs.impostor.empty()) {
      curve.truncated = true;
      curve.note = "curve truncated: surviving scores exhausted at irr " + std::to_string(rate);
      break;
    }
    curve.points.push_back(CurvePoint{rate, eer(pairs).eer, threshold});
    last_irr = rate;
  }
  return curve;
}

inline IrrEerCurve irr_eer_curve(const std::vector<SampleRecord>& records,
                                 const std::function<double(const SampleRecord&)>& quality_of,
                                 int steps) {
  return irr_eer_curve(build_verification_set(records, quality_of), steps);
}

/// Band rule of the single-factor baseline: keep iff mu - delta <= v < mu + delta.
/// The center itself is always kept, so delta = 0 keeps exactly v = mu.
inline std::vector<bool> band_threshold(const std::vector<double>& values, double mu,
                                        double delta) {
  if (delta < 0.0) throw ValidationError("band_threshold: delta must be >= 0");
  std::vector<bool> keep(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    keep[i] = ((values[i] >= mu - delta) && (values[i] < mu + delta)) || values[i] == mu;
  return keep;
}

/// IRR-EER curve for band gating: shrinks the band half-width delta over
/// quantiles of |v - mu| so the rejection rate walks from 0 toward 1.
inline IrrEerCurve band_irr_eer_curve(const VerificationSet& set, double mu, int steps) {
  if (steps < 2) throw ValidationError("band_irr_eer_curve: steps must be >= 2");
  const std::size_t n = set.probes();
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(set.quality[i] - mu);
  std::vector<double> sorted_dev = dev;
  std::sort(sorted_dev.begin(), sorted_dev.end(), std::greater<double>());

  IrrEerCurve curve;
  double last_irr = -1.0;
  for (int i = 0; i < steps; ++i) {
    const std::size_t target =
        static_cast<std::size_t>(std::llround(static_cast<double>(i) * (n - 1) / (steps - 1)));
    // half-width between the target deviation and the next larger one keeps
    // the target sample; a 1-ulp nudge would be absorbed when added to mu
    const double delta = target == 0 ? 2.0 * sorted_dev[0] + 1.0
                                     : 0.5 * (sorted_dev[target] + sorted_dev[target - 1]);
    const std::vector<bool> keep = band_threshold(set.quality, mu, delta);
    std::size_t discarded = 0;
    for (bool k : keep)
      if (!k) ++discarded;
    const double rate = irr(discarded, n);
    if (rate <= last_irr) continue;
    const ScorePairs pairs = set.surviving(keep);
    if (pairs.genuine.empty() || pairs.impostor.empty()) {
      curve.truncated = true;
      curve.note = "curve truncated: surviving scores exhausted at irr " + std::to_string(rate);
      break;
    }
    curve.points.push_back(CurvePoint{rate, eer(pairs).eer, delta});
    last_irr = rate;
  }
  return curve;
}

/// Pearson linear correlation coefficient.
inline double lcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("lcc: length mismatch");
  if (x.size() < 2) throw ValidationError("lcc: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw NumericError("lcc: undefined for zero-variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Average ranks with ties sharing the mean rank of their run.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank order correlation: Pearson correlation of average-tie-ranks.
inline double srocc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("srocc: length mismatch");
  if (x.size() < 2) throw ValidationError("srocc: need at least 2 points");
  return lcc(average_ranks(x), average_ranks(y));
}

inline double mse(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("mse: length mismatch");
  if (x.empty()) throw ValidationError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

struct CorrelationReport {
  double lcc = 0.0;
  double srocc = 0.0;
  double mse = 0.0;
};

/// LCC/SROCC/MSE between a quality value and the DFS label over
/// non-enrollment records.
inline CorrelationReport correlation_report(
    const std::vector<SampleRecord>& records,
    const std::function<double(const SampleRecord&)>& quality_of) {
  std::vector<double> q, label;
  for (const SampleRecord& r : records) {
    if (r.is_enrollment) continue;
    if (!r.dfs_label)
      throw ValidationError("record " + r.sample_id + " has no dfs_label; run label first");
    q.push_back(quality_of(r));
    label.push_back(*r.dfs_label);
  }
  if (q.size() < 2) throw ValidationError("correlation_report: need at least 2 probe records");
  return CorrelationReport{lcc(q, label), srocc(q, label), mse(q, label)};
}

}  // namespace irisqa
