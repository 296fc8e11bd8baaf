#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "irisqa/embedding.hpp"
#include "irisqa/errors.hpp"
#include "irisqa/manifest.hpp"

namespace irisqa {

/// Dot product of unit vectors, clamped to [-1, 1].
inline double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim())
    throw ValidationError("cosine_similarity: dimension mismatch (" + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()) + ")");
  double dot = 0.0;
  for (int i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
  return std::clamp(dot, -1.0, 1.0);
}

/// DFS quality label: affine-mapped cosine similarity, (s + 1) / 2 in [0, 1].
/// 1 = identical to enrollment, 0 = antipodal.
inline double dfs_label(const Embedding& probe, const Embedding& enrollment) {
  return (cosine_similarity(probe, enrollment) + 1.0) / 2.0;
}

/// The recognizer's verification score for a probe-gallery pair. Same
/// computation as cosine_similarity; named for its role in evaluation.
inline double match_score(const Embedding& probe, const Embedding& gallery) {
  return cosine_similarity(probe, gallery);
}

struct LabeledDataset {
  std::vector<SampleRecord> records;                  // dfs_label populated
  std::map<std::string, std::string> enrollment_index;  // class_id -> sample_id
};

/// Labels every record against its class enrollment. Each class must have
/// exactly one enrollment record.
inline LabeledDataset build_labels(const std::vector<SampleRecord>& records) {
  std::map<std::string, const SampleRecord*> enrollment;
  for (const SampleRecord& r : records) {
    if (!r.is_enrollment) continue;
    auto [it, inserted] = enrollment.emplace(r.class_id, &r);
    if (!inserted)
      throw ValidationError("class " + r.class_id + " has multiple enrollment records");
  }
  LabeledDataset out;
  out.records = records;
  for (SampleRecord& r : out.records) {
    auto it = enrollment.find(r.class_id);
    if (it == enrollment.end())
      throw ValidationError("class " + r.class_id + " has no enrollment record");
    r.dfs_label = r.is_enrollment ? 1.0 : dfs_label(r.embedding, it->second->embedding);
  }
  for (const auto& [cls, rec] : enrollment) out.enrollment_index[cls] = rec->sample_id;
  return out;
}

}  // namespace irisqa
