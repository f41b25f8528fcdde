#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "extrans/agents.hpp"
#include "extrans/error.hpp"
#include "extrans/transforms.hpp"

namespace extrans::stats {

struct CorrectnessRow {
  int trial_id = 0;
  /// Transform condition of the trial; the seed is not significant.
  TransformSpec condition;
  Agent agent = Agent::kHuman;
  bool correct = false;
};

/// Per-trial binary correctness of every agent.
struct CorrectnessTable {
  std::vector<CorrectnessRow> rows;

  /// Every trial_id appears exactly once per agent and with one condition.
  /// Throws FormatError otherwise.
  void validate() const;
};

/// A named subset of conditions (a report family).
struct TransformFilter {
  std::string name;   // machine id, e.g. "grid_shuffle"
  std::string title;  // report caption
  std::function<bool(const TransformSpec&)> accepts;
};

TransformFilter all_data_filter();
/// all, baseline, randomized, grid, within, local, color flatten, and every
/// 16x16 grid condition (grid, within and local at both probabilities).
std::vector<TransformFilter> report_families();
std::optional<TransformFilter> find_family(const std::string& name);

struct AccuracyCell {
  TransformSpec condition;
  Agent agent = Agent::kHuman;
  int trials = 0;
  int correct = 0;
  double accuracy_percent = 0.0;
};

/// Mean correctness x 100 grouped by (transform, probability, block,
/// agent). Groups without rows are absent. Ordered baseline, randomized,
/// grid, within, local, color flatten; then probability, block, agent.
std::vector<AccuracyCell> accuracy_table(const CorrectnessTable& table);

/// Columns: transform,probability,block_size,agent,trials,correct,accuracy
std::string accuracy_csv(const std::vector<AccuracyCell>& cells);

}  // namespace extrans::stats
