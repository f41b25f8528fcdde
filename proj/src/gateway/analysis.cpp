#include "extrans/gateway/analysis.hpp"

#include <algorithm>
#include <fstream>

namespace extrans::gateway {

stats::CorrectnessTable join_correctness(const experiment::Schedule& schedule,
                                         const std::map<int, bool>& human,
                                         const experiment::AgentCorrectness& networks) {
  stats::CorrectnessTable table;
  for (Agent agent : kAllAgents) {
    const std::map<int, bool>* answers = &human;
    if (agent != Agent::kHuman) {
      const auto it = networks.find(agent);
      if (it == networks.end()) {
        throw experiment::GapError({{agent, -1}},
                                   "no responses for agent " + std::string(agent_id(agent)));
      }
      answers = &it->second;
    }
    for (const auto& trial : schedule.test()) {
      const auto it = answers->find(trial.trial_id);
      if (it == answers->end()) {
        throw experiment::GapError({{agent, trial.trial_id}},
                                   "missing response: " + std::string(agent_id(agent)) + "@" +
                                       std::to_string(trial.trial_id));
      }
      TransformSpec condition = trial.spec;
      condition.seed = 0;
      table.rows.push_back({trial.trial_id, condition, agent, it->second});
    }
  }
  table.validate();
  return table;
}

AnalysisResult analyze(stats::CorrectnessTable table) {
  AnalysisResult result;
  result.accuracy = stats::accuracy_table(table);
  for (auto& family : stats::report_families()) {
    const bool any = std::any_of(table.rows.begin(), table.rows.end(),
                                 [&](const auto& row) { return family.accepts(row.condition); });
    if (!any) continue;
    const auto design = stats::build_design(table, family);
    result.reports.push_back({family, stats::fit_ols(design.y, design.x)});
  }
  result.table = std::move(table);
  return result;
}

void write_analysis(const AnalysisResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(out_dir / name);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    return out;
  };
  open("accuracy.csv") << stats::accuracy_csv(result.accuracy);
  nlohmann::json all = nlohmann::json::object();
  for (const auto& fr : result.reports) {
    const auto j = stats::to_json(fr.report);
    all[fr.family.name] = j;
    open("ols_" + fr.family.name + ".json") << j.dump(2) << '\n';
    open("ols_" + fr.family.name + ".txt") << stats::format_report(fr.report, "OLS for " + fr.family.title);
  }
  open("reports.json") << nlohmann::json{{"schema", 1}, {"families", all}}.dump(2) << '\n';
}

}  // namespace extrans::gateway
