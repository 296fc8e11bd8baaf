#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "irisqa/manifest.hpp"
#include "irisqa/rng.hpp"

using namespace irisqa;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "irisqa_test_manifest";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Embedding random_embedding(int dim, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.next_normal();
  return Embedding(std::move(v));
}

IrisGeometry some_geometry(double r = 30.0) {
  return IrisGeometry{{64.0, 48.0}, r * 0.4, {64.0, 48.0}, r};
}

SampleRecord make_record(const std::string& id, const std::string& cls, bool enroll, Rng& rng) {
  SampleRecord r(id, cls, "images/" + id + ".pgm", some_geometry(), "masks/" + id + ".pgm",
                 random_embedding(16, rng), enroll);
  return r;
}

std::string manifest_line(const SampleRecord& r) {
  return manifest_to_string({r}).substr(manifest_to_string({}).size());
}

}  // namespace

TEST_CASE("empty manifest file loads as an empty list") {
  const fs::path p = work_dir() / "empty.jsonl";
  std::ofstream(p).close();
  CHECK(load_manifest(p).empty());
}

TEST_CASE("header-only manifest loads as an empty list") {
  const fs::path p = work_dir() / "header_only.jsonl";
  save_manifest({}, p);
  CHECK(load_manifest(p).empty());
}

TEST_CASE("manifest without a schema header is rejected") {
  Rng rng(3);
  const fs::path p = work_dir() / "no_header.jsonl";
  std::ofstream out(p);
  out << manifest_line(make_record("a", "c0", true, rng));
  out.close();
  CHECK_THROWS_AS(load_manifest(p), ValidationError);
}

TEST_CASE("duplicate sample ids are rejected") {
  Rng rng(4);
  std::vector<SampleRecord> recs{make_record("dup", "c0", true, rng),
                                 make_record("dup", "c0", false, rng)};
  const fs::path p = work_dir() / "dup.jsonl";
  save_manifest(recs, p);
  CHECK_THROWS_MATCHES(load_manifest(p), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("duplicate sample_id")));
}

TEST_CASE("each class must have exactly one enrollment record") {
  Rng rng(5);
  SECTION("zero enrollments") {
    std::vector<SampleRecord> recs{make_record("a", "c0", false, rng),
                                   make_record("b", "c0", false, rng)};
    const fs::path p = work_dir() / "none.jsonl";
    save_manifest(recs, p);
    CHECK_THROWS_MATCHES(load_manifest(p), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("no enrollment")));
  }
  SECTION("multiple enrollments") {
    std::vector<SampleRecord> recs{make_record("a", "c0", true, rng),
                                   make_record("b", "c0", true, rng)};
    const fs::path p = work_dir() / "multi.jsonl";
    save_manifest(recs, p);
    CHECK_THROWS_MATCHES(load_manifest(p), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("enrollment records")));
  }
}

TEST_CASE("off-unit embeddings are renormalized with a warning inside [0.5, 2]") {
  const fs::path p = work_dir() / "norm.jsonl";
  {
    std::ofstream out(p);
    out << R"({"schema_version":1})" << "\n";
    out << R"({"sample_id":"a","class_id":"c0","image_path":"i.pgm","geometry":)"
        << R"({"pupil_center":[64,48],"pupil_radius":12,"iris_center":[64,48],"iris_radius":30},)"
        << R"("occlusion_path":"m.pgm","embedding":[1.5,0,0,0],"is_enrollment":true})" << "\n";
  }
  std::ostringstream warnings;
  const auto recs = load_manifest(p, warnings);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].embedding.values()[0] == Catch::Approx(1.0));
  CHECK(warnings.str().find("renormalizing") != std::string::npos);
}

TEST_CASE("embeddings with norm outside [0.5, 2] are rejected") {
  const fs::path p = work_dir() / "badnorm.jsonl";
  {
    std::ofstream out(p);
    out << R"({"schema_version":1})" << "\n";
    out << R"({"sample_id":"a","class_id":"c0","image_path":"i.pgm","geometry":)"
        << R"({"pupil_center":[64,48],"pupil_radius":12,"iris_center":[64,48],"iris_radius":30},)"
        << R"("occlusion_path":"m.pgm","embedding":[3.0,0,0,0],"is_enrollment":true})" << "\n";
  }
  CHECK_THROWS_MATCHES(load_manifest(p), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("norm")));
}

TEST_CASE("enrollment dfs_label must be exactly 1.0") {
  Rng rng(6);
  SampleRecord rec = make_record("a", "c0", true, rng);
  rec.dfs_label = 0.9;
  const fs::path p = work_dir() / "enroll_label.jsonl";
  save_manifest({rec}, p);
  CHECK_THROWS_AS(load_manifest(p), ValidationError);
}

TEST_CASE("labels outside [0, 1] are rejected") {
  Rng rng(7);
  SampleRecord rec = make_record("a", "c0", false, rng);
  SampleRecord enroll = make_record("e", "c0", true, rng);
  rec.dfs_label = 1.5;
  const fs::path p = work_dir() / "range.jsonl";
  save_manifest({enroll, rec}, p);
  CHECK_THROWS_AS(load_manifest(p), ValidationError);
}

TEST_CASE("seeded 50-record manifest round-trips every field") {
  Rng rng(42);
  std::vector<SampleRecord> recs;
  for (int cls = 0; cls < 10; ++cls) {
    for (int s = 0; s < 5; ++s) {
      const std::string id = "c" + std::to_string(cls) + "_s" + std::to_string(s);
      SampleRecord r = make_record(id, "c" + std::to_string(cls), s == 0, rng);
      r.geometry = some_geometry(20.0 + cls + 0.25 * s);
      if (s == 0) r.dfs_label = 1.0;
      else if (s % 2 == 1) r.dfs_label = 0.1 + 0.05 * s;
      if (s % 3 == 0) r.predicted_quality = 0.2 + 0.1 * (s % 7);
      recs.push_back(std::move(r));
    }
  }
  const fs::path p = work_dir() / "round.jsonl";
  save_manifest(recs, p);
  const auto back = load_manifest(p);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].sample_id == recs[i].sample_id);
    CHECK(back[i].class_id == recs[i].class_id);
    CHECK(back[i].image_path == recs[i].image_path);
    CHECK(back[i].occlusion_path == recs[i].occlusion_path);
    CHECK(back[i].is_enrollment == recs[i].is_enrollment);
    CHECK(back[i].geometry.pupil_radius == recs[i].geometry.pupil_radius);
    CHECK(back[i].geometry.iris_radius == recs[i].geometry.iris_radius);
    CHECK(back[i].geometry.iris_center.x == recs[i].geometry.iris_center.x);
    CHECK(back[i].dfs_label == recs[i].dfs_label);
    CHECK(back[i].predicted_quality == recs[i].predicted_quality);
    CHECK(back[i].embedding.values() == recs[i].embedding.values());
  }
  // a second save of the loaded records is byte-identical
  const fs::path p2 = work_dir() / "round2.jsonl";
  save_manifest(back, p2);
  CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("embedding constructor always yields unit norm") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(8);
    for (double& x : v) x = rng.uniform(-10.0, 10.0);
    if (norm_of(v) == 0.0) continue;
    const Embedding e(v);
    CHECK(std::abs(norm_of(e.values()) - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(Embedding(std::vector<double>{0.0, 0.0}), ValidationError);
}
