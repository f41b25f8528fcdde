#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "extrans/experiment/responses.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/stats/correctness.hpp"
#include "extrans/stats/ols.hpp"

namespace extrans::gateway {

/// One row per (test trial, agent).
stats::CorrectnessTable join_correctness(const experiment::Schedule& schedule,
                                         const std::map<int, bool>& human,
                                         const experiment::AgentCorrectness& networks);

struct FamilyReport {
  stats::TransformFilter family;
  stats::OlsReport report;
};

struct AnalysisResult {
  stats::CorrectnessTable table;
  std::vector<stats::AccuracyCell> accuracy;
  std::vector<FamilyReport> reports;
};

/// Accuracy table plus one OLS fit per report family. Families that
/// select no rows are skipped.
AnalysisResult analyze(stats::CorrectnessTable table);

/// Writes accuracy.csv, ols_<family>.json/.txt and reports.json.
void write_analysis(const AnalysisResult& result, const std::filesystem::path& out_dir);

}  // namespace extrans::gateway
