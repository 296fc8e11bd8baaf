#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irisqa/embedding.hpp"
#include "irisqa/errors.hpp"
#include "irisqa/fsio.hpp"
#include "irisqa/geometry.hpp"

namespace irisqa {

/// One eye image with identity, geometry, embedding and computed scores.
struct SampleRecord {
  std::string sample_id;
  std::string class_id;
  std::string image_path;      // relative to the manifest directory
  IrisGeometry geometry;
  std::string occlusion_path;  // relative to the manifest directory
  Embedding embedding;
  bool is_enrollment = false;
  std::optional<double> dfs_label;         // in [0, 1]; 1.0 for enrollment
  std::optional<double> predicted_quality; // in [0, 1]

  SampleRecord(std::string id, std::string cls, std::string img, IrisGeometry geom,
               std::string occ, Embedding emb, bool enroll)
      : sample_id(std::move(id)),
        class_id(std::move(cls)),
        image_path(std::move(img)),
        geometry(geom),
        occlusion_path(std::move(occ)),
        embedding(std::move(emb)),
        is_enrollment(enroll) {}
};

namespace manifest_detail {

inline nlohmann::json geometry_to_json(const IrisGeometry& g) {
  return nlohmann::json{{"pupil_center", {g.pupil_center.x, g.pupil_center.y}},
                        {"pupil_radius", g.pupil_radius},
                        {"iris_center", {g.iris_center.x, g.iris_center.y}},
                        {"iris_radius", g.iris_radius}};
}

inline IrisGeometry geometry_from_json(const nlohmann::json& j) {
  IrisGeometry g;
  g.pupil_center = {j.at("pupil_center").at(0).get<double>(),
                    j.at("pupil_center").at(1).get<double>()};
  g.pupil_radius = j.at("pupil_radius").get<double>();
  g.iris_center = {j.at("iris_center").at(0).get<double>(),
                   j.at("iris_center").at(1).get<double>()};
  g.iris_radius = j.at("iris_radius").get<double>();
  g.validate();
  return g;
}

inline void check_unit_interval(double v, const std::string& field, const std::string& id) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    throw ValidationError("record " + id + ": " + field + " must be in [0, 1]");
}

}  // namespace manifest_detail

constexpr int kManifestSchemaVersion = 1;

/// Serializes records as JSON Lines: a {"schema_version": 1} header line
/// followed by one record object per line.
inline std::string manifest_to_string(const std::vector<SampleRecord>& records) {
  std::ostringstream out;
  out << nlohmann::json{{"schema_version", kManifestSchemaVersion}}.dump() << "\n";
  for (const SampleRecord& r : records) {
    nlohmann::json j{{"sample_id", r.sample_id},
                     {"class_id", r.class_id},
                     {"image_path", r.image_path},
                     {"geometry", manifest_detail::geometry_to_json(r.geometry)},
                     {"occlusion_path", r.occlusion_path},
                     {"embedding", r.embedding.values()},
                     {"is_enrollment", r.is_enrollment}};
    if (r.dfs_label) j["dfs_label"] = *r.dfs_label;
    if (r.predicted_quality) j["predicted_quality"] = *r.predicted_quality;
    out << j.dump() << "\n";
  }
  return out.str();
}

inline void save_manifest(const std::vector<SampleRecord>& records,
                          const std::filesystem::path& path) {
  atomic_write_file(path, manifest_to_string(records));
}

/// Parses and validates a manifest. Enforces unique sample ids, exactly one
/// enrollment per class, embedding norm policy, and label ranges.
inline std::vector<SampleRecord> load_manifest(const std::filesystem::path& path,
                                               std::ostream& warnings = std::cerr) {
  if (!std::filesystem::exists(path)) throw IoError("no such manifest: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  std::vector<SampleRecord> records;
  std::set<std::string> seen_ids;
  std::map<std::string, int> enrollments_per_class;
  std::set<std::string> classes;

  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("manifest " + path.string() + " line " + std::to_string(lineno) +
                            ": " + e.what());
    }
    if (!header_seen) {
      if (!j.contains("schema_version"))
        throw ValidationError("manifest " + path.string() + ": first line must carry schema_version");
      if (j.at("schema_version").get<int>() != kManifestSchemaVersion)
        throw ValidationError("manifest " + path.string() + ": unsupported schema_version");
      header_seen = true;
      continue;
    }
    try {
      const std::string id = j.at("sample_id").get<std::string>();
      if (!seen_ids.insert(id).second)
        throw ValidationError("duplicate sample_id: " + id);

      std::vector<double> emb = j.at("embedding").get<std::vector<double>>();
      const double norm = norm_of(emb);
      if (std::abs(norm - 1.0) > 1e-6) {
        if (norm < 0.5 || norm > 2.0)
          throw ValidationError("record " + id + ": embedding norm " + std::to_string(norm) +
                                " outside [0.5, 2]");
        warnings << "warning: record " << id << ": embedding norm " << norm
                 << ", renormalizing\n";
      }

      SampleRecord rec(id, j.at("class_id").get<std::string>(),
                       j.at("image_path").get<std::string>(),
                       manifest_detail::geometry_from_json(j.at("geometry")),
                       j.at("occlusion_path").get<std::string>(), Embedding(std::move(emb)),
                       j.at("is_enrollment").get<bool>());
      if (j.contains("dfs_label")) {
        rec.dfs_label = j.at("dfs_label").get<double>();
        manifest_detail::check_unit_interval(*rec.dfs_label, "dfs_label", id);
        if (rec.is_enrollment && *rec.dfs_label != 1.0)
          throw ValidationError("record " + id + ": enrollment dfs_label must be 1.0");
      }
      if (j.contains("predicted_quality")) {
        rec.predicted_quality = j.at("predicted_quality").get<double>();
        manifest_detail::check_unit_interval(*rec.predicted_quality, "predicted_quality", id);
      }
      classes.insert(rec.class_id);
      if (rec.is_enrollment) ++enrollments_per_class[rec.class_id];
      records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("manifest " + path.string() + " line " + std::to_string(lineno) +
                            ": " + e.what());
    }
  }

  for (const std::string& cls : classes) {
    const int n = enrollments_per_class.count(cls) ? enrollments_per_class.at(cls) : 0;
    if (n == 0) throw ValidationError("class " + cls + " has no enrollment record");
    if (n > 1)
      throw ValidationError("class " + cls + " has " + std::to_string(n) +
                            " enrollment records, expected exactly one");
  }
  return records;
}

/// Resolves a record-relative path against the manifest's directory.
inline std::filesystem::path resolve_against(const std::filesystem::path& manifest_path,
                                             const std::string& relative) {
  std::filesystem::path p(relative);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace irisqa
