#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "extrans/cifar.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/gateway/session_store.hpp"

namespace httplib {
class Server;
}

namespace extrans::gateway {

inline constexpr const char* kListenEnvVar = "EXTRANS_LISTEN";

enum class SeedPolicy { kPerSession, kFixed };

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "extrans-data";
  std::filesystem::path dataset_path;
  SeedPolicy seed_policy = SeedPolicy::kPerSession;
  std::uint64_t fixed_seed = 0;
  std::optional<int> practice_trials;
  /// Replaces the canonical test plan with n trials for every condition.
  std::optional<int> trials_per_condition;
  std::int64_t confirmation_timeout_ms = 3000;
  bool fsync = true;
  /// Served at / when set (the browser UI build).
  std::filesystem::path static_dir;

  /// Throws SpecError on a non-positive timeout or bad counts, Error
  /// when the data directory cannot be written.
  void validate() const;
  experiment::ScheduleOptions schedule_options() const;
  std::filesystem::path log_path() const { return data_dir / "events.jsonl"; }
};

/// "host:port" or ":port" or "port".
void parse_listen_address(const std::string& text, ServiceConfig& config);
/// Applies EXTRANS_LISTEN when set.
void apply_environment(ServiceConfig& config);

std::int64_t unix_ms();

/// The experiment server. Sessions live in a SessionStore under
/// data_dir; a background thread advances confirmation screens after
/// confirmation_timeout_ms.
class Service {
 public:
  using Clock = std::function<std::int64_t()>;

  Service(ServiceConfig config, Dataset dataset, Clock clock = unix_ms);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts serving on background threads; returns the port.
  int start();
  /// Blocks serving on the calling thread (timeout thread still runs).
  void run();
  void stop();

  SessionStore& store() noexcept { return *store_; }
  const ServiceConfig& config() const noexcept { return config_; }
  std::shared_ptr<const experiment::Schedule> schedule_for(std::uint64_t seed);

  /// Payload of GET /sessions/{id}/current.
  nlohmann::json current_payload(const experiment::Session& session) const;

 private:
  void routes();
  void bind();
  void start_timer();
  void timer_loop();

  ServiceConfig config_;
  Dataset dataset_;
  Clock clock_;
  experiment::ScheduleOptions schedule_options_;
  std::mutex schedules_mutex_;
  std::map<std::uint64_t, std::shared_ptr<const experiment::Schedule>> schedules_;
  std::unique_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> server_;
  int bound_port_ = -1;
  std::thread listen_thread_;
  std::thread timer_thread_;
  std::mutex timer_mutex_;
  std::condition_variable timer_cv_;
  bool stopping_ = false;
};

extern const char* const kInstructionsText;
extern const char* const kTrialExcerpt;

}  // namespace extrans::gateway
