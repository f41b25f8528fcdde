#include "extrans/gateway/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "extrans/prng.hpp"

namespace extrans::gateway {

namespace ex = extrans::experiment;

nlohmann::json to_json(const LogEntry& entry) {
  nlohmann::json j{{"session_id", entry.session_id}, {"type", entry.type}, {"at_ms", entry.at_ms}};
  if (entry.type == "create") {
    j["agent_id"] = entry.agent_id;
    j["schedule_seed"] = entry.schedule_seed;
  } else if (entry.event) {
    if (const auto* s = std::get_if<ex::events::Submit>(&*entry.event)) {
      j["trial_id"] = s->trial_id;
      j["chosen_option"] = s->chosen_option;
      j["confidence"] = s->confidence;
      j["reaction_time_ms"] = s->reaction_time_ms;
      j["timestamp_ms"] = s->timestamp_ms;
    }
  }
  return j;
}

LogEntry log_entry_from_json(const nlohmann::json& j) {
  try {
    LogEntry entry;
    entry.session_id = j.at("session_id").get<std::string>();
    entry.type = j.at("type").get<std::string>();
    entry.at_ms = j.at("at_ms").get<std::int64_t>();
    if (entry.type == "create") {
      entry.agent_id = j.at("agent_id").get<std::string>();
      entry.schedule_seed = j.at("schedule_seed").get<std::uint64_t>();
    } else if (entry.type == "begin") {
      entry.event = ex::events::Begin{};
    } else if (entry.type == "continue") {
      entry.event = ex::events::Continue{};
    } else if (entry.type == "timeout") {
      entry.event = ex::events::Timeout{};
    } else if (entry.type == "submit") {
      entry.event = ex::events::Submit{j.at("trial_id").get<int>(), j.at("chosen_option").get<int>(),
                                       j.at("confidence").get<int>(),
                                       j.at("reaction_time_ms").get<std::int64_t>(),
                                       j.at("timestamp_ms").get<std::int64_t>()};
    } else {
      throw FormatError("unknown event type '" + entry.type + "'");
    }
    return entry;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed log entry: ") + e.what());
  }
}

namespace {

void apply_entry(std::map<std::string, ex::Session>& sessions, const LogEntry& entry,
                 const ScheduleProvider& provider) {
  if (entry.type == "create") {
    if (sessions.count(entry.session_id)) {
      throw FormatError("session " + entry.session_id + " created twice");
    }
    sessions.emplace(entry.session_id, ex::start_session(entry.session_id, entry.agent_id,
                                                         provider(entry.schedule_seed)));
    return;
  }
  const auto it = sessions.find(entry.session_id);
  if (it == sessions.end()) {
    throw FormatError("event for unknown session " + entry.session_id);
  }
  it->second = ex::advance(std::move(it->second), *entry.event);
}

}  // namespace

std::map<std::string, ex::Session> replay_log(const std::filesystem::path& path,
                                              const ScheduleProvider& provider,
                                              std::size_t* valid_bytes) {
  std::map<std::string, ex::Session> sessions;
  std::size_t good = 0;
  std::ifstream in(path, std::ios::binary);
  if (in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      ++line_no;
      const std::size_t nl = text.find('\n', pos);
      const bool complete = nl != std::string::npos;
      const std::string line = text.substr(pos, complete ? nl - pos : std::string::npos);
      const std::size_t next = complete ? nl + 1 : text.size();
      if (!complete) break;  // torn final write
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
          if (next >= text.size()) break;
          throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed line");
        }
        try {
          apply_entry(sessions, log_entry_from_json(j), provider);
        } catch (const Error& e) {
          throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
      }
      pos = next;
      good = pos;
    }
  }
  if (valid_bytes) *valid_bytes = good;
  return sessions;
}

SessionStore::SessionStore(std::filesystem::path log_path, ScheduleProvider provider, bool sync)
    : log_path_(std::move(log_path)), provider_(std::move(provider)), sync_(sync) {
  if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
  std::size_t valid = 0;
  auto sessions = replay_log(log_path_, provider_, &valid);
  if (std::filesystem::exists(log_path_) && std::filesystem::file_size(log_path_) != valid) {
    std::filesystem::resize_file(log_path_, valid);
  }
  fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error("cannot open event log " + log_path_.string() + ": " + std::strerror(errno));
  }
  for (auto& [id, session] : sessions) {
    auto s = std::make_shared<Slot>();
    s->session = std::move(session);
    slots_.emplace(id, std::move(s));
  }
  std::random_device rd;
  id_state_ = (std::uint64_t{rd()} << 32) ^ rd();
}

SessionStore::~SessionStore() {
  if (fd_ >= 0) ::close(fd_);
}

void SessionStore::append(const LogEntry& entry) {
  const std::string line = to_json(entry).dump() + "\n";
  std::lock_guard lock(log_mutex_);
  const ssize_t n = ::write(fd_, line.data(), line.size());
  if (n != static_cast<ssize_t>(line.size())) {
    throw Error("event log write failed: " + std::string(std::strerror(errno)));
  }
  if (sync_ && ::fsync(fd_) != 0) {
    throw Error("event log fsync failed: " + std::string(std::strerror(errno)));
  }
}

std::string SessionStore::fresh_id() {
  SplitMix64 mix(id_state_++);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix.next()));
  return buf;
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const std::string& session_id) const {
  std::lock_guard lock(map_mutex_);
  const auto it = slots_.find(session_id);
  if (it == slots_.end()) throw UnknownSessionError(session_id);
  return it->second;
}

ex::Session SessionStore::create(const std::string& agent_id, std::uint64_t schedule_seed,
                                 std::int64_t now_ms) {
  auto schedule = provider_(schedule_seed);
  auto s = std::make_shared<Slot>();
  std::lock_guard lock(map_mutex_);
  std::string id;
  do {
    id = fresh_id();
  } while (slots_.count(id));
  s->session = ex::start_session(id, agent_id, std::move(schedule));
  s->since_ms = now_ms;
  append({id, "create", now_ms, agent_id, schedule_seed, std::nullopt});
  slots_.emplace(id, s);
  return s->session;
}

ex::Session SessionStore::apply(const std::string& session_id, const ex::Event& event,
                                std::int64_t now_ms) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  ex::Session next = ex::advance(s->session, event);
  append({session_id, std::string(ex::event_name(event)), now_ms, {}, 0, event});
  s->session = std::move(next);
  s->since_ms = now_ms;
  return s->session;
}

std::optional<ex::Session> SessionStore::expire(const std::string& session_id, std::int64_t now_ms,
                                                std::int64_t timeout_ms) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  if (s->session.state != ex::SessionState::kConfirmation || now_ms - s->since_ms < timeout_ms) {
    return std::nullopt;
  }
  const ex::Event event = ex::events::Timeout{};
  ex::Session next = ex::advance(s->session, event);
  append({session_id, "timeout", now_ms, {}, 0, event});
  s->session = std::move(next);
  s->since_ms = now_ms;
  return s->session;
}

std::optional<ex::Session> SessionStore::get(const std::string& session_id) const {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(map_mutex_);
    const auto it = slots_.find(session_id);
    if (it == slots_.end()) return std::nullopt;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->session;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard lock(map_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : slots_) ids.push_back(id);
  return ids;
}

std::vector<std::string> SessionStore::sessions_in_confirmation() const {
  std::vector<std::pair<std::string, std::shared_ptr<Slot>>> all;
  {
    std::lock_guard lock(map_mutex_);
    all.assign(slots_.begin(), slots_.end());
  }
  std::vector<std::string> ids;
  for (auto& [id, s] : all) {
    std::lock_guard lock(s->mutex);
    if (s->session.state == ex::SessionState::kConfirmation) ids.push_back(id);
  }
  return ids;
}

}  // namespace extrans::gateway
