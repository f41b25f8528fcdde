#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "extrans/agents.hpp"
#include "extrans/error.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/experiment/session.hpp"

namespace extrans::experiment {

/// Raised when an agent lacks responses for some test trials.
class GapError : public Error {
 public:
  GapError(std::vector<std::pair<Agent, int>> gaps, const std::string& message)
      : Error(message), gaps_(std::move(gaps)) {}
  const std::vector<std::pair<Agent, int>>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<std::pair<Agent, int>> gaps_;
};

/// agent -> (test trial_id -> correct)
using AgentCorrectness = std::map<Agent, std::map<int, bool>>;

/// Reads the network fixture CSV (header `trial_id,agent,chosen_option`,
/// agents resnet50 / resnet101 / vone) and scores it against the
/// schedule. Every test trial must be answered by all three networks.
AgentCorrectness load_network_responses(std::istream& csv, const Schedule& schedule);
AgentCorrectness load_network_responses(const std::filesystem::path& path,
                                        const Schedule& schedule);

void write_network_responses(std::ostream& csv,
                             const std::vector<std::tuple<int, Agent, int>>& rows);

/// JSON-lines, one ResponseRecord per line; blank lines ignored.
std::vector<ResponseRecord> read_response_log(std::istream& in);
void write_response_log(std::ostream& out, const std::vector<ResponseRecord>& records);

/// Human correctness for every test trial, recomputed from the schedule.
/// Missing or duplicated test responses raise GapError / FormatError.
std::map<int, bool> score_human_responses(const std::vector<ResponseRecord>& records,
                                          const Schedule& schedule);

}  // namespace extrans::experiment
