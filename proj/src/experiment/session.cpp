#include "extrans/experiment/session.hpp"

#include <algorithm>

namespace extrans::experiment {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void illegal(const Session& s, const Event& e) {
  throw ProtocolError(ProtocolError::Code::kIllegalEvent,
                      std::string("event '") + std::string(event_name(e)) +
                          "' not allowed in state '" + std::string(state_name(s.state)) + "'");
}

bool answered(const Session& s, int trial_id) {
  return std::any_of(s.responses.begin(), s.responses.end(),
                     [&](const ResponseRecord& r) { return r.trial_id == trial_id; });
}

void record(Session& s, const events::Submit& submit) {
  const Trial* trial = s.current_trial();
  if (submit.trial_id != trial->trial_id) {
    if (answered(s, submit.trial_id)) {
      throw ProtocolError(ProtocolError::Code::kDuplicateResponse,
                          "trial " + std::to_string(submit.trial_id) + " already answered");
    }
    throw ProtocolError(ProtocolError::Code::kIllegalEvent,
                        "response for trial " + std::to_string(submit.trial_id) +
                            " but trial " + std::to_string(trial->trial_id) + " is showing");
  }
  if (submit.chosen_option < 0 || submit.chosen_option >= kOptionCount) {
    throw ProtocolError(ProtocolError::Code::kInvalidResponse,
                        "choice must be in [0, 5), got " + std::to_string(submit.chosen_option));
  }
  if (submit.confidence < 1 || submit.confidence > 5) {
    throw ProtocolError(ProtocolError::Code::kInvalidResponse,
                        "confidence must be 1..5, got " + std::to_string(submit.confidence));
  }
  if (submit.reaction_time_ms < 0) {
    throw ProtocolError(ProtocolError::Code::kInvalidResponse, "negative reaction time");
  }
  ResponseRecord r;
  r.trial_id = trial->trial_id;
  r.phase = trial->phase;
  r.chosen_option = submit.chosen_option;
  r.confidence = submit.confidence;
  r.reaction_time_ms = submit.reaction_time_ms;
  r.timestamp_ms = submit.timestamp_ms;
  r.correct = submit.chosen_option == trial->correct_option;
  s.responses.push_back(r);
  s.feedback = trial->phase == Phase::kPractice ? std::optional<bool>(r.correct) : std::nullopt;
  ++s.cursor;
  s.state = SessionState::kConfirmation;
}

void leave_confirmation(Session& s) {
  s.feedback.reset();
  if (s.cursor >= s.total()) {
    s.state = SessionState::kDone;
    return;
  }
  const bool last_was_test = s.responses.back().phase == Phase::kTest;
  const std::size_t tests = s.completed_test();
  s.state = last_was_test && tests > 0 && tests % kRestInterval == 0 ? SessionState::kRest
                                                                     : SessionState::kInTrial;
}

}  // namespace

std::string_view state_name(SessionState state) noexcept {
  switch (state) {
    case SessionState::kInstructions: return "instructions";
    case SessionState::kInTrial: return "in_trial";
    case SessionState::kConfirmation: return "confirmation";
    case SessionState::kRest: return "rest";
    case SessionState::kDone: return "done";
  }
  return "?";
}

std::optional<SessionState> parse_state(std::string_view name) noexcept {
  for (auto s : {SessionState::kInstructions, SessionState::kInTrial, SessionState::kConfirmation,
                 SessionState::kRest, SessionState::kDone}) {
    if (state_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view event_name(const Event& event) noexcept {
  return std::visit(Overloaded{[](const events::Begin&) { return std::string_view("begin"); },
                               [](const events::Submit&) { return std::string_view("submit"); },
                               [](const events::Continue&) { return std::string_view("continue"); },
                               [](const events::Timeout&) { return std::string_view("timeout"); }},
                    event);
}

nlohmann::json to_json(const ResponseRecord& r) {
  return {{"trial_id", r.trial_id},
          {"phase", std::string(phase_name(r.phase))},
          {"chosen_option", r.chosen_option},
          {"confidence", r.confidence},
          {"reaction_time_ms", r.reaction_time_ms},
          {"timestamp_ms", r.timestamp_ms},
          {"correct", r.correct}};
}

ResponseRecord response_from_json(const nlohmann::json& j) {
  try {
    ResponseRecord r;
    r.trial_id = j.at("trial_id").get<int>();
    r.phase = j.at("phase").get<std::string>() == "practice" ? Phase::kPractice : Phase::kTest;
    r.chosen_option = j.at("chosen_option").get<int>();
    r.confidence = j.at("confidence").get<int>();
    r.reaction_time_ms = j.at("reaction_time_ms").get<std::int64_t>();
    r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    r.correct = j.at("correct").get<bool>();
    if (r.confidence < 1 || r.confidence > 5) {
      throw FormatError("confidence out of range in response for trial " +
                        std::to_string(r.trial_id));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad response record: ") + e.what());
  }
}

const Trial* Session::current_trial() const noexcept {
  if (!schedule || cursor >= schedule->trials.size()) return nullptr;
  return &schedule->trials[cursor];
}

std::size_t Session::completed_test() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      responses.begin(), responses.end(), [](const ResponseRecord& r) { return r.phase == Phase::kTest; }));
}

Session start_session(std::string session_id, std::string agent_id,
                      std::shared_ptr<const Schedule> schedule) {
  Session s;
  s.session_id = std::move(session_id);
  s.agent_id = std::move(agent_id);
  s.schedule = std::move(schedule);
  return s;
}

Session advance(Session s, const Event& event) {
  using State = SessionState;
  std::visit(
      Overloaded{
          [&](const events::Begin&) {
            if (s.state != State::kInstructions) illegal(s, event);
            s.state = s.total() == 0 ? State::kDone : State::kInTrial;
          },
          [&](const events::Submit& submit) {
            if (s.state == State::kConfirmation && answered(s, submit.trial_id)) {
              throw ProtocolError(ProtocolError::Code::kDuplicateResponse,
                                  "trial " + std::to_string(submit.trial_id) +
                                      " already answered");
            }
            if (s.state != State::kInTrial) illegal(s, event);
            record(s, submit);
          },
          [&](const events::Continue&) {
            switch (s.state) {
              case State::kInstructions:
                s.state = s.total() == 0 ? State::kDone : State::kInTrial;
                break;
              case State::kConfirmation:
                leave_confirmation(s);
                break;
              case State::kRest:
                s.state = State::kInTrial;
                break;
              default:
                illegal(s, event);
            }
          },
          [&](const events::Timeout&) {
            if (s.state != State::kConfirmation) illegal(s, event);
            leave_confirmation(s);
          },
      },
      event);
  return s;
}

}  // namespace extrans::experiment
