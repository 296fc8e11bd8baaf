#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "irisqa/metrics.hpp"
#include "irisqa/rng.hpp"

using namespace irisqa;

namespace {

SampleRecord make_record(const std::string& id, const std::string& cls, bool enroll,
                         Embedding emb) {
  return SampleRecord(id, cls, id + ".pgm", {{64, 48}, 12, {64, 48}, 30}, id + "_m.pgm",
                      std::move(emb), enroll);
}

// exhaustive oracle: far/frr at every midpoint between consecutive distinct
// sorted scores (plus outer sentinels); reports the min |far - frr| crossing.
double eer_oracle(const ScorePairs& pairs) {
  std::vector<double> all = pairs.genuine;
  all.insert(all.end(), pairs.impostor.begin(), pairs.impostor.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> candidates;
  candidates.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    candidates.push_back((all[i] + all[i + 1]) / 2.0);
  for (double v : all) candidates.push_back(v);  // rates step exactly at scores
  candidates.push_back(all.back() + 1.0);
  double best_gap = 2.0, best_eer = 0.0;
  for (double t : candidates) {
    const FarFrr ff = far_frr(pairs, t);
    const double gap = std::abs(ff.far - ff.frr);
    if (gap < best_gap) {
      best_gap = gap;
      best_eer = (ff.far + ff.frr) / 2.0;
    }
  }
  return best_eer;
}

// O(n^2) counting ranks: rank = (#less) + (#equal + 1) / 2
std::vector<double> rank_oracle(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = less + (equal + 1) / 2.0;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("far_frr boundary and counting behavior") {
  const ScorePairs pairs{{0.9, 0.8}, {0.3, 0.7}};
  const FarFrr low = far_frr(pairs, -1.0);
  CHECK(low.far == 1.0);
  CHECK(low.frr == 0.0);
  const FarFrr high = far_frr(pairs, 2.0);
  CHECK(high.far == 0.0);
  CHECK(high.frr == 1.0);
  const FarFrr mid = far_frr(pairs, 0.75);
  CHECK(mid.far == 0.0);
  CHECK(mid.frr == 0.0);
  CHECK_THROWS_AS(far_frr(ScorePairs{{}, {0.1}}, 0.5), ValidationError);
}

TEST_CASE("far is non-increasing and frr non-decreasing in the threshold") {
  Rng rng(201);
  ScorePairs pairs;
  for (int i = 0; i < 200; ++i) {
    pairs.genuine.push_back(rng.next_normal() + 1.0);
    pairs.impostor.push_back(rng.next_normal());
  }
  double prev_far = 1.1, prev_frr = -0.1;
  for (double t = -4.0; t <= 5.0; t += 0.05) {
    const FarFrr ff = far_frr(pairs, t);
    CHECK(ff.far <= prev_far);
    CHECK(ff.frr >= prev_frr);
    prev_far = ff.far;
    prev_frr = ff.frr;
  }
}

TEST_CASE("eer of perfectly separated scores is zero") {
  const EerResult r = eer(ScorePairs{{1.0, 1.0, 1.0}, {0.0, 0.0}});
  CHECK(r.eer == 0.0);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("eer of identical distributions is one half") {
  const EerResult r = eer(ScorePairs{{0.2, 0.5, 0.9}, {0.2, 0.5, 0.9}});
  CHECK(r.eer == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("eer flags the all-identical degenerate case") {
  const EerResult r = eer(ScorePairs{{0.5, 0.5}, {0.5, 0.5, 0.5}});
  CHECK(r.degenerate);
  CHECK(r.eer == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("eer matches the exhaustive midpoint oracle on seeded score sets") {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    ScorePairs pairs;
    const int ng = 200 + static_cast<int>(rng.next_below(200));
    const int ni = 200 + static_cast<int>(rng.next_below(200));
    const double sep = rng.uniform(0.2, 2.0);
    for (int i = 0; i < ng; ++i) pairs.genuine.push_back(rng.next_normal() + sep);
    for (int i = 0; i < ni; ++i) pairs.impostor.push_back(rng.next_normal());
    const double got = eer(pairs).eer;
    const double want = eer_oracle(pairs);
    CHECK(std::abs(got - want) <= 0.005);
  }
}

TEST_CASE("irr is the discarded fraction") {
  CHECK(irr(0, 100) == 0.0);
  CHECK(irr(25, 100) == 0.25);
  CHECK(irr(100, 100) == 1.0);
  CHECK_THROWS_AS(irr(1, 0), ValidationError);
  CHECK_THROWS_AS(irr(5, 4), ValidationError);
}

namespace {

// two well-separated classes plus controllable probe quality
std::vector<SampleRecord> two_class_records(int probes_per_class,
                                            const std::vector<double>& labels_c0,
                                            const std::vector<double>& labels_c1) {
  const Embedding e0({1.0, 0.0, 0.0});
  const Embedding e1({0.0, 1.0, 0.0});
  std::vector<SampleRecord> records{make_record("e0", "c0", true, e0),
                                    make_record("e1", "c1", true, e1)};
  for (int i = 0; i < probes_per_class; ++i) {
    // probe embeddings interpolate toward the other class as quality drops
    auto mix = [](const Embedding& own, const Embedding& other, double q) {
      std::vector<double> v(own.dim());
      for (int k = 0; k < own.dim(); ++k)
        v[k] = q * own.values()[k] + (1.0 - q) * other.values()[k];
      return Embedding(std::move(v));
    };
    SampleRecord p0 = make_record("p0_" + std::to_string(i), "c0", false,
                                  mix(e0, e1, labels_c0[i]));
    p0.dfs_label = labels_c0[i];
    SampleRecord p1 = make_record("p1_" + std::to_string(i), "c1", false,
                                  mix(e1, e0, labels_c1[i]));
    p1.dfs_label = labels_c1[i];
    records.push_back(std::move(p0));
    records.push_back(std::move(p1));
  }
  return records;
}

double quality_getter_dfs(const SampleRecord& r) { return *r.dfs_label; }

}  // namespace

TEST_CASE("irr_eer_curve collapses to a single point for constant quality") {
  auto records = two_class_records(3, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5});
  const IrrEerCurve curve = irr_eer_curve(records, quality_getter_dfs, 10);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].irr == 0.0);
}

TEST_CASE("irr_eer_curve stays at zero eer on separable data") {
  auto records = two_class_records(4, {0.95, 0.9, 0.85, 0.8}, {0.96, 0.91, 0.86, 0.81});
  const IrrEerCurve curve = irr_eer_curve(records, quality_getter_dfs, 5);
  REQUIRE(curve.points.size() >= 2);
  for (const CurvePoint& p : curve.points) CHECK(p.eer == 0.0);
}

TEST_CASE("irr_eer_curve starts at the full-dataset eer and enrollments survive") {
  Rng rng(203);
  std::vector<double> q0, q1;
  for (int i = 0; i < 10; ++i) {
    q0.push_back(rng.uniform(0.3, 1.0));
    q1.push_back(rng.uniform(0.3, 1.0));
  }
  auto records = two_class_records(10, q0, q1);
  const VerificationSet vset = build_verification_set(records, quality_getter_dfs);
  const IrrEerCurve curve = irr_eer_curve(vset, 8);
  REQUIRE_FALSE(curve.points.empty());
  CHECK(curve.points.front().irr == 0.0);
  const ScorePairs all{vset.genuine, [&] {
                         std::vector<double> flat;
                         for (const auto& v : vset.impostor)
                           flat.insert(flat.end(), v.begin(), v.end());
                         return flat;
                       }()};
  CHECK(curve.points.front().eer == eer(all).eer);
  // strictly increasing irr, never exhausting the probes
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    CHECK(curve.points[i].irr > curve.points[i - 1].irr);
  CHECK(curve.points.back().irr < 1.0);
}

TEST_CASE("verification set construction validates its inputs") {
  const Embedding e({1.0, 0.0});
  CHECK_THROWS_AS(build_verification_set({make_record("e0", "c0", true, e)}, quality_getter_dfs),
                  ValidationError);
  CHECK_THROWS_AS(irr_eer_curve(two_class_records(2, {0.5, 0.4}, {0.5, 0.4}),
                                quality_getter_dfs, 1),
                  ValidationError);
}

TEST_CASE("band_threshold boundary semantics") {
  const std::vector<double> values{1.0, 2.0, 3.0, 4.0};
  SECTION("delta 0 keeps only the exact center") {
    const auto keep = band_threshold({1.0, 2.5, 4.0}, 2.5, 0.0);
    CHECK(keep == std::vector<bool>{false, true, false});
  }
  SECTION("huge delta keeps everything") {
    const auto keep = band_threshold(values, 0.0, std::numeric_limits<double>::max());
    CHECK(std::count(keep.begin(), keep.end(), true) == 4);
  }
  SECTION("interval is left-closed, right-open") {
    const auto keep = band_threshold(values, 2.5, 1.0);  // [1.5, 3.5)
    CHECK(keep == std::vector<bool>{false, true, true, false});
  }
  SECTION("keep set shrinks as delta decreases") {
    Rng rng(204);
    std::vector<double> vals;
    for (int i = 0; i < 100; ++i) vals.push_back(rng.uniform(-5.0, 5.0));
    long prev = 101;
    for (double delta : {4.0, 2.0, 1.0, 0.5, 0.1, 0.0}) {
      const auto keep = band_threshold(vals, 0.3, delta);
      const long kept = std::count(keep.begin(), keep.end(), true);
      CHECK(kept <= prev);
      prev = kept;
    }
  }
  CHECK_THROWS_AS(band_threshold(values, 0.0, -1.0), ValidationError);
}

TEST_CASE("lcc and srocc hit the monotone extremes exactly") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v + 1.0);
  CHECK(lcc(x, y) == 1.0);
  CHECK(srocc(x, y) == 1.0);
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(lcc(x, neg) == -1.0);
  CHECK(srocc(x, neg) == -1.0);
  CHECK(mse(x, x) == 0.0);
}

TEST_CASE("correlations reject zero variance and length mismatches") {
  CHECK_THROWS_AS(lcc({1, 1, 1}, {1, 2, 3}), NumericError);
  CHECK_THROWS_AS(srocc({2, 2}, {1, 2}), NumericError);
  CHECK_THROWS_AS(lcc({1, 2}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(mse({1}, {}), ValidationError);
}

TEST_CASE("srocc tie handling matches the counting-rank oracle") {
  Rng rng(205);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 60; ++i) {
      x.push_back(static_cast<double>(rng.next_below(8)));  // heavy ties
      y.push_back(static_cast<double>(rng.next_below(5)) + 0.1 * rng.next_double());
    }
    // skip degenerate draws
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    const double got = srocc(x, y);
    const double want = pearson(rank_oracle(x), rank_oracle(y));
    CHECK(std::abs(got - want) <= 1e-12);
  }
}

TEST_CASE("srocc is invariant under strictly monotone transforms") {
  Rng rng(206);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform(-2.0, 2.0));
    y.push_back(rng.uniform(-2.0, 2.0));
  }
  const double base = srocc(x, y);
  std::vector<double> ex;
  for (double v : x) ex.push_back(std::exp(v));
  CHECK(srocc(ex, y) == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("lcc is invariant under positive affine transforms") {
  Rng rng(207);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform(-2.0, 2.0));
    y.push_back(0.7 * x.back() + rng.next_normal());
  }
  const double base = lcc(x, y);
  std::vector<double> ax;
  for (double v : x) ax.push_back(3.5 * v - 11.0);
  CHECK(lcc(ax, y) == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("correlation_report on the label itself is perfect") {
  auto records = two_class_records(5, {0.9, 0.8, 0.7, 0.6, 0.5}, {0.85, 0.75, 0.65, 0.55, 0.45});
  const CorrelationReport rep = correlation_report(records, quality_getter_dfs);
  CHECK(rep.lcc == 1.0);
  CHECK(rep.srocc == 1.0);
  CHECK(rep.mse == 0.0);
}

TEST_CASE("correlation_report rejects constant quality values") {
  auto records = two_class_records(3, {0.9, 0.8, 0.7}, {0.85, 0.75, 0.65});
  CHECK_THROWS_AS(correlation_report(records, [](const SampleRecord&) { return 1.0; }),
                  NumericError);
}
