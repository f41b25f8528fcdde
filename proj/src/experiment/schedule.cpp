#include "extrans/experiment/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "extrans/experiment/manifest.hpp"
#include "extrans/prng.hpp"

namespace extrans::experiment {

namespace {

template <typename T>
void shuffle(std::vector<T>& items, Prng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.bounded(i)]);
  }
}

void draw_options(Trial& trial, int true_label, Prng& rng) {
  std::vector<int> others;
  others.reserve(kFineClasses - 1);
  for (int label = 0; label < kFineClasses; ++label) {
    if (label != true_label) others.push_back(label);
  }
  // Partial Fisher-Yates: the first four slots become the distractors.
  for (std::size_t i = 0; i < kOptionCount - 1; ++i) {
    std::swap(others[i], others[i + rng.bounded(others.size() - i)]);
  }
  std::vector<int> options(others.begin(), others.begin() + (kOptionCount - 1));
  options.push_back(true_label);
  shuffle(options, rng);
  for (std::size_t i = 0; i < kOptionCount; ++i) {
    trial.options[i] = options[i];
    if (options[i] == true_label) trial.correct_option = static_cast<int>(i);
  }
}

Trial make_trial(const Dataset& dataset, std::size_t index, const TransformSpec& condition,
                 Phase phase, Prng& rng) {
  Trial t;
  t.phase = phase;
  t.split = dataset.split;
  t.image_index = index;
  t.spec = condition;
  t.spec.seed = rng.next_u64();
  t.display_seed = rng.next_u64();
  draw_options(t, dataset.records[index].fine_label, rng);
  return t;
}

}  // namespace

std::string_view phase_name(Phase phase) noexcept {
  return phase == Phase::kPractice ? "practice" : "test";
}

TestPlan canonical_test_plan() {
  TestPlan plan;
  for (const auto& c : experiment_conditions()) {
    plan.emplace_back(c, c.kind == TransformKind::kRandomizedShuffle ? 4 : 5);
  }
  return plan;
}

std::span<const Trial> Schedule::practice() const noexcept {
  const auto n = static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(), [](const Trial& t) { return t.phase == Phase::kPractice; }));
  return std::span<const Trial>(trials).first(n);
}

std::span<const Trial> Schedule::test() const noexcept {
  return std::span<const Trial>(trials).subspan(practice().size());
}

const Trial* Schedule::find(int trial_id) const noexcept {
  if (trial_id < 0 || static_cast<std::size_t>(trial_id) >= trials.size()) return nullptr;
  return &trials[static_cast<std::size_t>(trial_id)];
}

Schedule generate_schedule(const Dataset& dataset, std::uint64_t seed,
                           const ScheduleOptions& options) {
  if (dataset.split != Split::kTest) {
    throw ScheduleError("trial schedules are drawn from the test split");
  }
  int planned = 0;
  for (const auto& [condition, count] : options.plan) {
    condition.validate();
    if (count < 0) throw ScheduleError("negative trial count for " + condition.tag());
    planned += count;
  }
  if (planned != options.expected_test_trials) {
    throw ScheduleError("test plan has " + std::to_string(planned) + " trials, expected " +
                        std::to_string(options.expected_test_trials));
  }
  const auto conditions = experiment_conditions();
  if (options.practice_trials < 0 ||
      static_cast<std::size_t>(options.practice_trials) > conditions.size()) {
    throw ScheduleError("practice trials must use distinct conditions (at most " +
                        std::to_string(conditions.size()) + ")");
  }

  Prng rng(seed);
  std::vector<std::size_t> candidates(dataset.size());
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  shuffle(candidates, rng);

  std::set<std::pair<TransformKind, std::size_t>> used_with_kind;
  std::set<std::size_t> used_in_test;
  std::vector<Trial> test;
  for (const auto& [condition, count] : options.plan) {
    std::set<int> classes;
    for (int n = 0; n < count; ++n) {
      const auto it = std::find_if(candidates.begin(), candidates.end(), [&](std::size_t idx) {
        return !used_with_kind.contains({condition.kind, idx}) &&
               !classes.contains(dataset.records[idx].fine_label);
      });
      if (it == candidates.end()) {
        throw ScheduleError("dataset too small: cannot find " + std::to_string(count) +
                            " distinct-class images for " + condition.tag());
      }
      used_with_kind.insert({condition.kind, *it});
      used_in_test.insert(*it);
      classes.insert(dataset.records[*it].fine_label);
      test.push_back(make_trial(dataset, *it, condition, Phase::kTest, rng));
    }
  }
  shuffle(test, rng);

  auto practice_conditions = conditions;
  shuffle(practice_conditions, rng);
  std::vector<Trial> practice;
  auto next = candidates.begin();
  for (int n = 0; n < options.practice_trials; ++n) {
    next = std::find_if(next, candidates.end(),
                        [&](std::size_t idx) { return !used_in_test.contains(idx); });
    if (next == candidates.end()) throw ScheduleError("dataset too small for practice trials");
    practice.push_back(make_trial(dataset, *next, practice_conditions[static_cast<std::size_t>(n)],
                                  Phase::kPractice, rng));
    ++next;
  }

  Schedule schedule;
  schedule.seed = seed;
  schedule.trials = std::move(practice);
  schedule.trials.insert(schedule.trials.end(), test.begin(), test.end());
  for (std::size_t i = 0; i < schedule.trials.size(); ++i) {
    schedule.trials[i].trial_id = static_cast<int>(i);
  }
  return schedule;
}

nlohmann::json to_json(const Trial& t) {
  return {{"trial_id", t.trial_id},
          {"phase", std::string(phase_name(t.phase))},
          {"image", {{"split", split_name(t.split)}, {"index", t.image_index}}},
          {"spec", to_json(t.spec)},
          {"options", t.options},
          {"correct_option", t.correct_option},
          {"display_seed", t.display_seed}};
}

Trial trial_from_json(const nlohmann::json& j) {
  try {
    Trial t;
    t.trial_id = j.at("trial_id").get<int>();
    const auto phase = j.at("phase").get<std::string>();
    if (phase != "practice" && phase != "test") throw FormatError("bad phase " + phase);
    t.phase = phase == "practice" ? Phase::kPractice : Phase::kTest;
    t.split = j.at("image").at("split").get<std::string>() == "train" ? Split::kTrain : Split::kTest;
    t.image_index = j.at("image").at("index").get<std::size_t>();
    t.spec = spec_from_json(j.at("spec"));
    t.options = j.at("options").get<std::array<int, kOptionCount>>();
    t.correct_option = j.at("correct_option").get<int>();
    t.display_seed = j.at("display_seed").get<std::uint64_t>();
    if (t.correct_option < 0 || t.correct_option >= kOptionCount) {
      throw FormatError("correct_option out of range in trial " + std::to_string(t.trial_id));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trial: ") + e.what());
  }
}

nlohmann::json to_json(const Schedule& schedule) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : schedule.trials) trials.push_back(to_json(t));
  return {{"schema", kSchemaVersion}, {"seed", schedule.seed}, {"trials", trials}};
}

Schedule schedule_from_json(const nlohmann::json& j) {
  if (j.value("schema", 0) != kSchemaVersion) throw FormatError("unsupported schedule schema");
  Schedule s;
  s.seed = j.value("seed", std::uint64_t{0});
  bool seen_test = false;
  for (const auto& tj : j.at("trials")) {
    Trial t = trial_from_json(tj);
    if (t.trial_id != static_cast<int>(s.trials.size())) {
      throw FormatError("trial ids must be consecutive from 0");
    }
    if (t.phase == Phase::kTest) seen_test = true;
    if (t.phase == Phase::kPractice && seen_test) {
      throw FormatError("practice trial " + std::to_string(t.trial_id) + " follows a test trial");
    }
    s.trials.push_back(t);
  }
  return s;
}

}  // namespace extrans::experiment
