#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "extrans/error.hpp"
#include "extrans/experiment/session.hpp"

namespace extrans::gateway {

class UnknownSessionError : public Error {
 public:
  explicit UnknownSessionError(const std::string& id) : Error("unknown session: " + id) {}
};

/// Produces the schedule for a session from the seed recorded at creation.
using ScheduleProvider =
    std::function<std::shared_ptr<const experiment::Schedule>(std::uint64_t seed)>;

/// One line of the event log.
///   {"session_id", "type": create|begin|submit|continue|timeout, "at_ms", ...}
/// create carries agent_id and schedule_seed; submit carries the
/// events::Submit fields.
struct LogEntry {
  std::string session_id;
  std::string type;
  std::int64_t at_ms = 0;
  std::string agent_id;
  std::uint64_t schedule_seed = 0;
  std::optional<experiment::Event> event;
};

nlohmann::json to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& j);

/// Rebuilds every session from a log. A malformed final line (a write
/// cut short by a crash) is dropped; malformed lines elsewhere raise
/// FormatError.
std::map<std::string, experiment::Session> replay_log(const std::filesystem::path& path,
                                                      const ScheduleProvider& provider,
                                                      std::size_t* valid_bytes = nullptr);

/// Durable session map backed by an append-only JSON-lines event log.
/// Each event is validated against the in-memory session, appended as a
/// single write (fsync'd when `sync`), and only then committed.
/// Events for one session are serialized; different sessions proceed in
/// parallel.
class SessionStore {
 public:
  SessionStore(std::filesystem::path log_path, ScheduleProvider provider, bool sync = true);
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  experiment::Session create(const std::string& agent_id, std::uint64_t schedule_seed,
                             std::int64_t now_ms);
  /// Throws UnknownSessionError or experiment::ProtocolError.
  experiment::Session apply(const std::string& session_id, const experiment::Event& event,
                            std::int64_t now_ms);
  /// Applies a timeout when the session has sat in confirmation for at
  /// least timeout_ms. Returns the new state when it fired.
  std::optional<experiment::Session> expire(const std::string& session_id, std::int64_t now_ms,
                                            std::int64_t timeout_ms);

  std::optional<experiment::Session> get(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  std::vector<std::string> sessions_in_confirmation() const;
  const std::filesystem::path& log_path() const noexcept { return log_path_; }

 private:
  struct Slot {
    std::mutex mutex;
    experiment::Session session;
    std::int64_t since_ms = 0;  // when the current state was entered
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  void append(const LogEntry& entry);
  std::string fresh_id();

  std::filesystem::path log_path_;
  ScheduleProvider provider_;
  bool sync_;
  int fd_ = -1;
  std::mutex log_mutex_;
  mutable std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::uint64_t id_state_;
};

}  // namespace extrans::gateway
