#pragma once

// Correctness data reconstructed from the study's reported accuracy and OLS
// tables: per condition, how many of its test trials each agent got
// right. Within a condition the first `correct` trials (presentation
// order) are the correct ones.

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "extrans/agents.hpp"
#include "extrans/experiment/manifest.hpp"
#include "extrans/experiment/responses.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/stats/correctness.hpp"

namespace extrans::testing {

struct ConditionCounts {
  TransformSpec condition;
  int trials = 0;
  // human, vone, resnet101, resnet50 (kAllAgents order)
  std::array<int, 4> correct{};
};

inline std::vector<ConditionCounts> study_counts() {
  using K = TransformKind;
  auto spec = [](K kind, int block, double p) { return TransformSpec{kind, block, p, 0}; };
  return {
      {spec(K::kBaseline, 0, 1.0), 5, {5, 3, 3, 4}},
      {spec(K::kRandomizedShuffle, 0, 0.5), 4, {4, 2, 2, 2}},
      {spec(K::kRandomizedShuffle, 0, 1.0), 4, {2, 2, 2, 2}},
      {spec(K::kGridShuffle, 4, 1.0), 5, {5, 1, 2, 2}},
      {spec(K::kGridShuffle, 8, 1.0), 5, {5, 1, 1, 1}},
      {spec(K::kGridShuffle, 16, 1.0), 5, {5, 2, 1, 1}},
      {spec(K::kWithinGridShuffle, 4, 0.5), 5, {5, 2, 1, 2}},
      {spec(K::kWithinGridShuffle, 4, 1.0), 5, {4, 2, 1, 1}},
      {spec(K::kWithinGridShuffle, 8, 0.5), 5, {5, 2, 1, 1}},
      {spec(K::kWithinGridShuffle, 8, 1.0), 5, {4, 1, 0, 1}},
      {spec(K::kWithinGridShuffle, 16, 0.5), 5, {4, 1, 1, 1}},
      {spec(K::kWithinGridShuffle, 16, 1.0), 5, {4, 1, 1, 1}},
      {spec(K::kLocalGridShuffle, 4, 0.5), 5, {4, 3, 3, 3}},
      {spec(K::kLocalGridShuffle, 4, 1.0), 5, {4, 3, 3, 2}},
      {spec(K::kLocalGridShuffle, 8, 0.5), 5, {4, 2, 2, 2}},
      {spec(K::kLocalGridShuffle, 8, 1.0), 5, {3, 2, 2, 2}},
      {spec(K::kLocalGridShuffle, 16, 0.5), 5, {4, 1, 2, 1}},
      {spec(K::kLocalGridShuffle, 16, 1.0), 5, {3, 1, 2, 1}},
      {spec(K::kColorFlatten, 0, 1.0), 5, {0, 3, 3, 4}},
  };
}

/// Rows for trial ids 0..92 in condition order.
inline stats::CorrectnessTable study_table() {
  stats::CorrectnessTable table;
  int trial_id = 0;
  std::vector<std::tuple<int, TransformSpec, int>> trials;
  for (const auto& c : study_counts()) {
    for (int i = 0; i < c.trials; ++i) trials.emplace_back(trial_id++, c.condition, i);
  }
  for (std::size_t a = 0; a < kAllAgents.size(); ++a) {
    for (const auto& [id, cond, rank] : trials) {
      int want = 0;
      for (const auto& c : study_counts()) {
        if (experiment::same_condition(c.condition, cond)) want = c.correct[a];
      }
      table.rows.push_back({id, cond, kAllAgents[a], rank < want});
    }
  }
  return table;
}

struct FixtureResponses {
  std::vector<experiment::ResponseRecord> human;
  std::vector<std::tuple<int, Agent, int>> networks;
};

/// Responses to a canonical schedule's test trials that realise the
/// study counts.
inline FixtureResponses study_responses(const experiment::Schedule& schedule) {
  FixtureResponses out;
  const auto counts = study_counts();
  std::map<std::size_t, int> seen;
  for (const auto& t : schedule.test()) {
    std::size_t ci = counts.size();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (experiment::same_condition(counts[k].condition, t.spec)) ci = k;
    }
    const int rank = seen[ci]++;
    for (std::size_t a = 0; a < kAllAgents.size(); ++a) {
      const bool correct = ci < counts.size() && rank < counts[ci].correct[a];
      const int choice = correct ? t.correct_option : (t.correct_option + 1) % experiment::kOptionCount;
      if (kAllAgents[a] == Agent::kHuman) {
        experiment::ResponseRecord r;
        r.trial_id = t.trial_id;
        r.phase = experiment::Phase::kTest;
        r.chosen_option = choice;
        r.confidence = 3;
        r.reaction_time_ms = 1500;
        r.correct = correct;
        out.human.push_back(r);
      } else {
        out.networks.emplace_back(t.trial_id, kAllAgents[a], choice);
      }
    }
  }
  return out;
}

/// Reported values per report family.
struct ReferenceOls {
  std::string family;
  int n;
  std::array<double, 4> coef;
  std::array<double, 4> std_err;
  double r_squared, adj_r_squared, f_statistic, f_p_value, log_likelihood, aic, bic;
  double skew, kurtosis, jarque_bera, jb_p_value;
};

inline std::vector<ReferenceOls> reference_ols() {
  return {
      {"all", 372, {0.7957, -0.4194, -0.4409, -0.4301}, {0.048, 0.068, 0.068, 0.068},
       0.139, 0.132, 19.87, 5.89e-12, -241.54, 491.1, 506.8, 0.228, 1.602, 33.509, 5.29e-08},
      {"baseline", 20, {1.0, -0.4, -0.4, -0.2}, {0.200, 0.283, 0.283, 0.283},
       0.147, -0.013, 0.9167, 0.455, -10.053, 28.11, 32.09, -0.750, 2.125, 2.513, 0.285},
      {"randomized_shuffle", 32, {0.75, -0.25, -0.25, -0.25}, {0.183, 0.259, 0.259, 0.259},
       0.048, -0.054, 0.4667, 0.708, -22.193, 52.39, 58.25, -0.207, 1.227, 4.421, 0.110},
      {"grid_shuffle", 60, {1.0, -0.7333, -0.7333, -0.7333}, {0.102, 0.145, 0.145, 0.145},
       0.407, 0.376, 12.83, 1.72e-06, -27.549, 63.10, 71.47, 1.219, 2.818, 14.931, 0.000572},
      {"within_grid_shuffle", 120, {0.8667, -0.5667, -0.7, -0.6333}, {0.074, 0.105, 0.105, 0.105},
       0.325, 0.308, 18.62, 6.32e-10, -60.629, 129.3, 140.4, 0.726, 3.065, 10.557, 0.00510},
      {"local_grid_shuffle", 120, {0.7333, -0.3333, -0.2667, -0.3667}, {0.089, 0.126, 0.126, 0.126},
       0.083, 0.059, 3.503, 0.0177, -81.874, 171.7, 182.9, 0.080, 1.340, 13.905, 0.000956},
      {"color_flatten", 20, {0.0, 0.6, 0.6, 0.8}, {0.200, 0.283, 0.283, 0.283},
       0.360, 0.240, 3.000, 0.0615, -10.053, 28.11, 32.09, -0.750, 2.125, 2.513, 0.285},
      {"all_16x16", 100, {0.8, -0.56, -0.52, -0.6}, {0.086, 0.121, 0.121, 0.121},
       0.253, 0.230, 10.84, 3.39e-06, -55.030, 118.1, 128.5, 0.621, 2.653, 6.940, 0.0311},
  };
}

}  // namespace extrans::testing
