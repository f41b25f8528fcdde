#include "extrans/stats/correctness.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace extrans::stats {

namespace {

int family_rank(TransformKind kind) {
  switch (kind) {
    case TransformKind::kBaseline: return 0;
    case TransformKind::kRandomizedShuffle: return 1;
    case TransformKind::kGridShuffle: return 2;
    case TransformKind::kWithinGridShuffle: return 3;
    case TransformKind::kLocalGridShuffle: return 4;
    case TransformKind::kColorFlatten: return 5;
  }
  return 6;
}

// Seed-free grouping key. Probability and block only matter for the
// kinds that use them.
std::tuple<int, double, int> condition_key(const TransformSpec& s) {
  return {family_rank(s.kind), uses_probability(s.kind) ? s.probability : 0.0,
          uses_blocks(s.kind) ? s.block_size : 0};
}

TransformFilter kind_filter(std::string name, std::string title, TransformKind kind) {
  return {std::move(name), std::move(title),
          [kind](const TransformSpec& s) { return s.kind == kind; }};
}

}  // namespace

void CorrectnessTable::validate() const {
  std::set<std::pair<Agent, int>> seen;
  std::map<int, std::tuple<int, double, int>> conditions;
  std::map<Agent, std::set<int>> trials;
  for (const auto& row : rows) {
    if (!seen.insert({row.agent, row.trial_id}).second) {
      throw FormatError("trial " + std::to_string(row.trial_id) + " appears twice for " +
                        std::string(agent_id(row.agent)));
    }
    const auto key = condition_key(row.condition);
    if (auto [it, inserted] = conditions.emplace(row.trial_id, key); !inserted && it->second != key) {
      throw FormatError("trial " + std::to_string(row.trial_id) + " has conflicting conditions");
    }
    trials[row.agent].insert(row.trial_id);
  }
  for (Agent a : kAllAgents) {
    if (trials[a].size() != conditions.size()) {
      throw FormatError("agent " + std::string(agent_id(a)) + " answered " +
                        std::to_string(trials[a].size()) + " of " +
                        std::to_string(conditions.size()) + " trials");
    }
  }
}

TransformFilter all_data_filter() {
  return {"all", "All data (baseline and transforms)", [](const TransformSpec&) { return true; }};
}

std::vector<TransformFilter> report_families() {
  using K = TransformKind;
  return {
      all_data_filter(),
      kind_filter("baseline", "Baseline", K::kBaseline),
      kind_filter("randomized_shuffle", "Randomized Image Shuffle", K::kRandomizedShuffle),
      kind_filter("grid_shuffle", "Grid Shuffle (all parameters)", K::kGridShuffle),
      kind_filter("within_grid_shuffle", "Within Grid Shuffle", K::kWithinGridShuffle),
      kind_filter("local_grid_shuffle", "Local Grid Shuffle", K::kLocalGridShuffle),
      kind_filter("color_flatten", "Color Flatten", K::kColorFlatten),
      {"all_16x16", "All transforms with 16x16 grid",
       [](const TransformSpec& s) { return uses_blocks(s.kind) && s.block_size == 16; }},
  };
}

std::optional<TransformFilter> find_family(const std::string& name) {
  for (auto& f : report_families()) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

std::vector<AccuracyCell> accuracy_table(const CorrectnessTable& table) {
  std::map<std::pair<std::tuple<int, double, int>, int>, AccuracyCell> groups;
  for (const auto& row : table.rows) {
    const auto key = std::make_pair(condition_key(row.condition), static_cast<int>(row.agent));
    auto [it, inserted] = groups.try_emplace(key);
    AccuracyCell& cell = it->second;
    if (inserted) {
      cell.condition = row.condition;
      cell.condition.seed = 0;
      cell.agent = row.agent;
    }
    ++cell.trials;
    cell.correct += row.correct;
  }
  std::vector<AccuracyCell> out;
  out.reserve(groups.size());
  for (auto& [key, cell] : groups) {
    cell.accuracy_percent = 100.0 * cell.correct / cell.trials;
    out.push_back(cell);
  }
  return out;
}

std::string accuracy_csv(const std::vector<AccuracyCell>& cells) {
  std::ostringstream out;
  out << "transform,probability,block_size,agent,trials,correct,accuracy\n";
  for (const auto& c : cells) {
    out << kind_name(c.condition.kind) << ',';
    if (uses_probability(c.condition.kind)) out << c.condition.probability;
    out << ',';
    if (uses_blocks(c.condition.kind)) out << c.condition.block_size;
    out << ',' << agent_id(c.agent) << ',' << c.trials << ',' << c.correct << ','
        << c.accuracy_percent << '\n';
  }
  return out.str();
}

}  // namespace extrans::stats
