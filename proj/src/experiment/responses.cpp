#include "extrans/experiment/responses.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <algorithm>
#include <cctype>

namespace extrans::experiment {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string& s, std::size_t line_no, const char* what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return value;
}

std::string describe_gaps(const std::vector<std::pair<Agent, int>>& gaps) {
  std::ostringstream msg;
  msg << gaps.size() << " missing response(s):";
  std::size_t shown = 0;
  for (const auto& [agent, trial] : gaps) {
    if (shown++ == 20) {
      msg << " ...";
      break;
    }
    msg << ' ' << agent_id(agent) << '@' << trial;
  }
  return msg.str();
}

}  // namespace

AgentCorrectness load_network_responses(std::istream& csv, const Schedule& schedule) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(csv, line) && trim(line).empty()) ++line_no;
  ++line_no;
  if (split_csv_line(trim(line)) != std::vector<std::string>{"trial_id", "agent", "chosen_option"}) {
    throw FormatError("network response CSV must start with header trial_id,agent,chosen_option");
  }

  AgentCorrectness out;
  for (Agent a : kNetworkAgents) out[a];
  while (std::getline(csv, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    const int trial_id = parse_int(fields[0], line_no, "trial_id");
    const auto agent = parse_agent(fields[1]);
    if (!agent || *agent == Agent::kHuman) {
      throw FormatError("line " + std::to_string(line_no) + ": unknown agent '" + fields[1] + "'");
    }
    const int choice = parse_int(fields[2], line_no, "chosen_option");
    if (choice < 0 || choice >= kOptionCount) {
      throw FormatError("line " + std::to_string(line_no) + ": chosen_option out of range");
    }
    const Trial* trial = schedule.find(trial_id);
    if (!trial || trial->phase != Phase::kTest) {
      throw FormatError("line " + std::to_string(line_no) + ": trial " + fields[0] +
                        " is not a test trial of this schedule");
    }
    if (!out[*agent].emplace(trial_id, choice == trial->correct_option).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate response for " +
                        fields[1] + " trial " + fields[0]);
    }
  }

  std::vector<std::pair<Agent, int>> gaps;
  for (Agent a : kNetworkAgents) {
    for (const auto& t : schedule.test()) {
      if (!out[a].contains(t.trial_id)) gaps.emplace_back(a, t.trial_id);
    }
  }
  if (!gaps.empty()) throw GapError(gaps, describe_gaps(gaps));
  return out;
}

AgentCorrectness load_network_responses(const std::filesystem::path& path,
                                        const Schedule& schedule) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_network_responses(in, schedule);
}

void write_network_responses(std::ostream& csv,
                             const std::vector<std::tuple<int, Agent, int>>& rows) {
  csv << "trial_id,agent,chosen_option\n";
  for (const auto& [trial, agent, choice] : rows) {
    csv << trial << ',' << agent_id(agent) << ',' << choice << '\n';
  }
}

std::vector<ResponseRecord> read_response_log(std::istream& in) {
  std::vector<ResponseRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(response_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("response log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_response_log(std::ostream& out, const std::vector<ResponseRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::map<int, bool> score_human_responses(const std::vector<ResponseRecord>& records,
                                          const Schedule& schedule) {
  std::map<int, bool> out;
  for (const auto& r : records) {
    const Trial* trial = schedule.find(r.trial_id);
    if (!trial) throw FormatError("response for unknown trial " + std::to_string(r.trial_id));
    if (trial->phase != Phase::kTest) continue;
    if (!out.emplace(r.trial_id, r.chosen_option == trial->correct_option).second) {
      throw FormatError("duplicate human response for trial " + std::to_string(r.trial_id));
    }
  }
  std::vector<std::pair<Agent, int>> gaps;
  for (const auto& t : schedule.test()) {
    if (!out.contains(t.trial_id)) gaps.emplace_back(Agent::kHuman, t.trial_id);
  }
  if (!gaps.empty()) throw GapError(gaps, describe_gaps(gaps));
  return out;
}

}  // namespace extrans::experiment
