#include "extrans/experiment/manifest.hpp"

#include <string>

#include "extrans/error.hpp"

namespace extrans::experiment {

TransformManifest build_manifest() {
  using K = TransformKind;
  TransformManifest m;
  for (double p : {0.5, 1.0}) m.entries.push_back({K::kRandomizedShuffle, 0, p, 0});
  for (int b : {4, 8, 16}) m.entries.push_back({K::kGridShuffle, b, 1.0, 0});
  for (K kind : {K::kWithinGridShuffle, K::kLocalGridShuffle}) {
    for (int b : {4, 8, 16}) {
      for (double p : {0.5, 1.0}) m.entries.push_back({kind, b, p, 0});
    }
  }
  m.entries.push_back({K::kColorFlatten, 0, 1.0, 0});
  return m;
}

std::vector<TransformSpec> experiment_conditions() {
  std::vector<TransformSpec> out{{TransformKind::kBaseline, 0, 1.0, 0}};
  const auto m = build_manifest();
  out.insert(out.end(), m.entries.begin(), m.entries.end());
  return out;
}

bool same_condition(const TransformSpec& a, const TransformSpec& b) noexcept {
  return a.kind == b.kind && a.block_size == b.block_size && a.probability == b.probability;
}

nlohmann::json to_json(const TransformSpec& spec) {
  return {{"kind", std::string(kind_name(spec.kind))},
          {"block_size", spec.block_size},
          {"probability", spec.probability},
          {"seed", spec.seed}};
}

TransformSpec spec_from_json(const nlohmann::json& j) {
  try {
    TransformSpec spec;
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw FormatError("unknown transform kind " + j.at("kind").dump());
    spec.kind = *kind;
    spec.block_size = j.value("block_size", 0);
    spec.probability = j.value("probability", 1.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad transform spec: ") + e.what());
  }
}

nlohmann::json to_json(const TransformManifest& manifest) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& spec : manifest.entries) entries.push_back(to_json(spec));
  return {{"schema", kSchemaVersion}, {"entries", entries}};
}

TransformManifest manifest_from_json(const nlohmann::json& j) {
  if (j.value("schema", 0) != kSchemaVersion) throw FormatError("unsupported manifest schema");
  TransformManifest m;
  for (const auto& e : j.at("entries")) m.entries.push_back(spec_from_json(e));
  return m;
}

}  // namespace extrans::experiment
