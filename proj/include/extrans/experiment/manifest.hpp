#pragma once

#include <vector>

#include <json.hpp>

#include "extrans/transforms.hpp"

namespace extrans::experiment {

inline constexpr int kSchemaVersion = 1;

struct TransformManifest {
  std::vector<TransformSpec> entries;
};

/// The 18 evaluated configurations, in this order:
/// RandomizedShuffle p in {0.5, 1}; GridShuffle b in {4, 8, 16} (p = 1);
/// WithinGridShuffle and LocalGridShuffle b in {4, 8, 16} x p in {0.5, 1};
/// ColorFlatten. All seeds are 0; trials assign their own.
TransformManifest build_manifest();

/// Baseline followed by the manifest entries (19 conditions).
std::vector<TransformSpec> experiment_conditions();

nlohmann::json to_json(const TransformSpec& spec);
TransformSpec spec_from_json(const nlohmann::json& j);

/// {"schema": 1, "entries": [...]}
nlohmann::json to_json(const TransformManifest& manifest);
TransformManifest manifest_from_json(const nlohmann::json& j);

/// Same kind, block size and probability (seed ignored).
bool same_condition(const TransformSpec& a, const TransformSpec& b) noexcept;

}  // namespace extrans::experiment
