#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "extrans/error.hpp"
#include "extrans/experiment/schedule.hpp"

namespace extrans::experiment {

inline constexpr int kRestInterval = 10;

enum class SessionState { kInstructions, kInTrial, kConfirmation, kRest, kDone };

std::string_view state_name(SessionState state) noexcept;
std::optional<SessionState> parse_state(std::string_view name) noexcept;

struct ResponseRecord {
  int trial_id = 0;
  Phase phase = Phase::kTest;
  int chosen_option = 0;
  int confidence = 0;               // 1 (least) .. 5 (most confident)
  std::int64_t reaction_time_ms = 0;  // client measured
  std::int64_t timestamp_ms = 0;      // server receive time, Unix ms
  bool correct = false;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

nlohmann::json to_json(const ResponseRecord& record);
ResponseRecord response_from_json(const nlohmann::json& j);

namespace events {
struct Begin {};
struct Submit {
  int trial_id = 0;
  int chosen_option = 0;
  int confidence = 0;
  std::int64_t reaction_time_ms = 0;
  std::int64_t timestamp_ms = 0;
};
struct Continue {};
/// Confirmation screen auto-advance.
struct Timeout {};
}  // namespace events

using Event = std::variant<events::Begin, events::Submit, events::Continue, events::Timeout>;

std::string_view event_name(const Event& event) noexcept;

class ProtocolError : public Error {
 public:
  enum class Code { kIllegalEvent, kInvalidResponse, kDuplicateResponse };

  ProtocolError(Code code, const std::string& message) : Error(message), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct Session {
  std::string session_id;
  std::string agent_id;
  std::shared_ptr<const Schedule> schedule;
  /// Index of the trial being shown (or next to show).
  std::size_t cursor = 0;
  SessionState state = SessionState::kInstructions;
  std::vector<ResponseRecord> responses;
  /// Correctness of the latest response; set for practice trials only.
  std::optional<bool> feedback;

  const Trial* current_trial() const noexcept;
  std::size_t completed() const noexcept { return responses.size(); }
  std::size_t completed_test() const noexcept;
  std::size_t total() const noexcept { return schedule ? schedule->trials.size() : 0; }

  friend bool operator==(const Session& a, const Session& b) {
    return a.session_id == b.session_id && a.agent_id == b.agent_id &&
           (a.schedule == b.schedule || (a.schedule && b.schedule && *a.schedule == *b.schedule)) &&
           a.cursor == b.cursor && a.state == b.state && a.responses == b.responses &&
           a.feedback == b.feedback;
  }
};

Session start_session(std::string session_id, std::string agent_id,
                      std::shared_ptr<const Schedule> schedule);

/// Applies one event. Transitions:
///   instructions --begin/continue--> in_trial (done if no trials)
///   in_trial --submit--> confirmation (response recorded)
///   confirmation --continue/timeout--> rest after every 10th test
///     response, done after the last trial, otherwise in_trial
///   rest --continue--> in_trial
/// Throws ProtocolError for an illegal event, an out-of-range choice or
/// confidence, or a second response to an answered trial.
Session advance(Session session, const Event& event);

}  // namespace extrans::experiment
