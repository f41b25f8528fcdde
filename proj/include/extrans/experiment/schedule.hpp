#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "extrans/cifar.hpp"
#include "extrans/error.hpp"
#include "extrans/transforms.hpp"

namespace extrans::experiment {

class ScheduleError : public Error {
 public:
  using Error::Error;
};

enum class Phase { kPractice, kTest };

std::string_view phase_name(Phase phase) noexcept;

inline constexpr int kOptionCount = 5;

struct Trial {
  int trial_id = 0;
  Phase phase = Phase::kTest;
  Split split = Split::kTest;
  std::size_t image_index = 0;
  /// spec.seed drives the 32x32 (machine) rendering.
  TransformSpec spec;
  /// Fine-label ids; options[correct_option] is the true label.
  std::array<int, kOptionCount> options{};
  int correct_option = 0;
  /// Seed for the 128x128 human display rendering.
  std::uint64_t display_seed = 0;

  int true_label() const noexcept { return options[static_cast<std::size_t>(correct_option)]; }

  friend bool operator==(const Trial&, const Trial&) = default;
};

/// Condition (seed ignored) -> number of test trials.
using TestPlan = std::vector<std::pair<TransformSpec, int>>;

/// Baseline 5, RandomizedShuffle 4 per probability, every grid
/// configuration 5, ColorFlatten 5: 93 trials.
TestPlan canonical_test_plan();

struct ScheduleOptions {
  int practice_trials = 17;
  int expected_test_trials = 93;
  TestPlan plan = canonical_test_plan();
};

struct Schedule {
  std::uint64_t seed = 0;
  /// Practice trials first, then test trials in presentation order;
  /// trial_id equals the position in this vector.
  std::vector<Trial> trials;

  std::span<const Trial> practice() const noexcept;
  std::span<const Trial> test() const noexcept;
  const Trial* find(int trial_id) const noexcept;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Builds a practice + test schedule from the test split.
///
/// Random stream (one Prng(seed)), consumed in this order:
///   1. Fisher-Yates shuffle of all dataset indices (candidate order).
///   2. Test trials, plan order: for each trial pick the first candidate
///      not yet used with the same transform kind and whose class is not
///      already in the condition; draw spec seed, display seed, then
///      options (4 distractors from the other 99 labels without
///      replacement, then a shuffle of the 5).
///   3. Fisher-Yates shuffle of the test trials (presentation order).
///   4. Practice: shuffle the 19 conditions and take the first n; images
///      are the first candidates not used by any test trial; seeds and
///      options as in step 2.
///
/// Throws ScheduleError when the plan total differs from
/// expected_test_trials, the split is not test, or the dataset cannot
/// supply enough distinct images/classes.
Schedule generate_schedule(const Dataset& dataset, std::uint64_t seed,
                           const ScheduleOptions& options = {});

nlohmann::json to_json(const Trial& trial);
Trial trial_from_json(const nlohmann::json& j);
/// {"schema": 1, "seed": ..., "trials": [...]}
nlohmann::json to_json(const Schedule& schedule);
Schedule schedule_from_json(const nlohmann::json& j);

}  // namespace extrans::experiment
