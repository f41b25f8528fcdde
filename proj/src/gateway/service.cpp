#include "extrans/gateway/service.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "extrans/experiment/manifest.hpp"
#include "extrans/gateway/stimulus.hpp"
#include "extrans/image_io.hpp"

namespace extrans::gateway {

namespace ex = extrans::experiment;
using nlohmann::json;

const char* const kInstructionsText =
    "Thank you for taking part. You will see a series of small photographs, some of them "
    "shuffled or with their colours flattened. For each image choose the one of five object "
    "names that best matches what it shows, then rate how confident you are from 1 (least) to "
    "5 (most). The first trials are practice and tell you whether you were right; the main "
    "trials do not. After each answer a confirmation screen appears; press Continue or the "
    "spacebar, or wait a few seconds. Every 10 main trials you can take a short rest. There is "
    "no time limit.";

const char* const kTrialExcerpt =
    "Pick the object that best matches the image and rate your confidence (1 = least, 5 = most).";

std::int64_t unix_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void ServiceConfig::validate() const {
  if (confirmation_timeout_ms <= 0) {
    throw SpecError("confirmation timeout must be > 0 ms, got " +
                    std::to_string(confirmation_timeout_ms));
  }
  if (port < 0 || port > 65535) throw SpecError("port out of range: " + std::to_string(port));
  if (practice_trials && *practice_trials < 0) throw SpecError("practice trials must be >= 0");
  if (trials_per_condition && *trials_per_condition < 1) {
    throw SpecError("trials per condition must be >= 1");
  }
  std::error_code ec;
  std::filesystem::create_directories(data_dir, ec);
  const auto probe = data_dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush()) {
      throw Error("data directory not writable: " + data_dir.string());
    }
  }
  std::filesystem::remove(probe, ec);
}

ex::ScheduleOptions ServiceConfig::schedule_options() const {
  ex::ScheduleOptions options;
  if (practice_trials) options.practice_trials = *practice_trials;
  if (trials_per_condition) {
    options.plan.clear();
    for (const auto& spec : ex::experiment_conditions()) {
      options.plan.emplace_back(spec, *trials_per_condition);
    }
    options.expected_test_trials =
        static_cast<int>(options.plan.size()) * *trials_per_condition;
  }
  return options;
}

void parse_listen_address(const std::string& text, ServiceConfig& config) {
  const auto colon = text.rfind(':');
  const std::string host = colon == std::string::npos ? "" : text.substr(0, colon);
  const std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    config.port = p;
  } catch (const std::exception&) {
    throw SpecError("invalid listen address '" + text + "'");
  }
  if (!host.empty()) config.host = host;
}

void apply_environment(ServiceConfig& config) {
  if (const char* listen = std::getenv(kListenEnvVar); listen && *listen) {
    parse_listen_address(listen, config);
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

int protocol_status(const ex::ProtocolError& e) {
  switch (e.code()) {
    case ex::ProtocolError::Code::kInvalidResponse: return 422;
    case ex::ProtocolError::Code::kDuplicateResponse:
    case ex::ProtocolError::Code::kIllegalEvent: return 409;
  }
  return 409;
}

std::optional<std::int64_t> integral(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (std::isfinite(v) && v == std::floor(v)) return static_cast<std::int64_t>(v);
  }
  return std::nullopt;
}

/// Wraps a handler so store and protocol errors map to status codes.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const UnknownSessionError& e) {
      send_error(res, 404, e.what());
    } catch (const ex::ProtocolError& e) {
      send_error(res, protocol_status(e), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw json::type_error::create(302, "body must be a JSON object", nullptr);
  return body;
}

}  // namespace

Service::Service(ServiceConfig config, Dataset dataset, Clock clock)
    : config_(std::move(config)), dataset_(std::move(dataset)), clock_(std::move(clock)) {
  config_.validate();
  schedule_options_ = config_.schedule_options();
  std::filesystem::create_directories(config_.data_dir / "schedules");
  store_ = std::make_unique<SessionStore>(
      config_.log_path(), [this](std::uint64_t seed) { return schedule_for(seed); }, config_.fsync);
  server_ = std::make_unique<httplib::Server>();
  routes();
}

Service::~Service() { stop(); }

std::shared_ptr<const ex::Schedule> Service::schedule_for(std::uint64_t seed) {
  std::lock_guard lock(schedules_mutex_);
  auto& slot = schedules_[seed];
  if (!slot) {
    slot = std::make_shared<const ex::Schedule>(ex::generate_schedule(dataset_, seed, schedule_options_));
    const auto path = config_.data_dir / "schedules" / (std::to_string(seed) + ".json");
    if (!std::filesystem::exists(path)) {
      std::ofstream(path) << ex::to_json(*slot).dump() << '\n';
    }
  }
  return slot;
}

json Service::current_payload(const ex::Session& s) const {
  const ex::Trial* trial = s.state == ex::SessionState::kInTrial ? s.current_trial() : nullptr;
  const std::size_t total = s.total();
  const std::size_t total_test = s.schedule ? s.schedule->test().size() : 0;
  json j{{"session_id", s.session_id},
         {"state", ex::state_name(s.state)},
         {"phase", nullptr},
         {"trial_index", s.cursor},
         {"trial_id", nullptr},
         {"total", total},
         {"image", nullptr},
         {"options", json::array()},
         {"practice_feedback_enabled", false},
         {"rest", s.state == ex::SessionState::kRest},
         {"progress",
          {{"completed", s.completed()},
           {"total", total},
           {"completed_test", s.completed_test()},
           {"total_test", total_test}}},
         {"instructions", kInstructionsText}};
  const ex::Trial* shown = trial;
  if (!shown && s.state == ex::SessionState::kConfirmation && !s.responses.empty()) {
    shown = s.schedule->find(s.responses.back().trial_id);
  }
  if (shown) {
    j["phase"] = ex::phase_name(shown->phase);
    j["practice_feedback_enabled"] = shown->phase == ex::Phase::kPractice;
  }
  if (s.state == ex::SessionState::kConfirmation && s.feedback) {
    j["feedback"] = {{"correct", *s.feedback}};
  }
  if (trial) {
    const Image image = render_human_stimulus(dataset_, *trial);
    const auto png = encode_image(image, ImageFormat::kPng);
    j["trial_id"] = trial->trial_id;
    j["image"] = base64_encode(png);
    j["image_width"] = image.width();
    j["image_height"] = image.height();
    json options = json::array();
    for (int label : trial->options) options.push_back(dataset_.fine_name(label));
    j["options"] = options;
    j["excerpt"] = kTrialExcerpt;
  }
  return j;
}

void Service::routes() {
  auto& srv = *server_;

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             const auto it = body.find("agent_id");
             if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
               send_error(res, 422, "agent_id (non-empty string) required");
               return;
             }
             std::uint64_t seed = config_.fixed_seed;
             if (config_.seed_policy == SeedPolicy::kPerSession) {
               std::random_device rd;
               seed = (std::uint64_t{rd()} << 32) ^ rd();
             }
             const auto s = store_->create(it->get<std::string>(), seed, clock_());
             send_json(res, 201,
                       {{"session_id", s.session_id},
                        {"state", ex::state_name(s.state)},
                        {"instructions", kInstructionsText}});
           }));

  srv.Get(R"(/sessions/([^/]+)/current)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto s = store_->get(id);
            if (!s) throw UnknownSessionError(id);
            send_json(res, 200, current_payload(*s));
          }));

  srv.Post(R"(/sessions/([^/]+)/response)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const auto s = store_->get(id);
             if (!s) throw UnknownSessionError(id);
             const json body = parse_body(req);
             const auto choice = integral(body, "choice_index");
             const auto confidence = integral(body, "confidence");
             const auto rt = integral(body, "reaction_time_ms");
             if (!choice || *choice < 0 || *choice >= ex::kOptionCount) {
               send_error(res, 422, "choice_index must be an integer in [0, 5)");
               return;
             }
             if (!confidence || *confidence < 1 || *confidence > 5) {
               send_error(res, 422, "confidence must be an integer in [1, 5]");
               return;
             }
             if (!rt || *rt < 0) {
               send_error(res, 422, "reaction_time_ms must be a non-negative integer");
               return;
             }
             int trial_id = -1;
             if (const auto explicit_id = integral(body, "trial_id")) {
               trial_id = static_cast<int>(*explicit_id);
             } else if (s->state == ex::SessionState::kConfirmation && !s->responses.empty()) {
               trial_id = s->responses.back().trial_id;
             } else if (const ex::Trial* t = s->current_trial()) {
               trial_id = t->trial_id;
             }
             const std::int64_t now = clock_();
             const auto next = store_->apply(
                 id,
                 ex::events::Submit{trial_id, static_cast<int>(*choice), static_cast<int>(*confidence),
                                    *rt, now},
                 now);
             json out{{"accepted", true}, {"next_state", ex::state_name(next.state)}};
             if (next.feedback) out["correct"] = *next.feedback;
             send_json(res, 200, out);
           }));

  srv.Post(R"(/sessions/([^/]+)/continue)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const auto next = store_->apply(id, ex::events::Continue{}, clock_());
             send_json(res, 200, {{"state", ex::state_name(next.state)}});
           }));

  srv.Get(R"(/sessions/([^/]+)/export)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto s = store_->get(id);
            if (!s) throw UnknownSessionError(id);
            std::ostringstream out;
            for (const auto& r : s->responses) {
              json line = ex::to_json(r);
              line["session_id"] = s->session_id;
              line["agent_id"] = s->agent_id;
              out << line.dump() << '\n';
            }
            res.status = 200;
            res.set_content(out.str(), "application/x-ndjson");
          }));

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"ok", true}});
  });

  if (!config_.static_dir.empty()) srv.set_mount_point("/", config_.static_dir.string());
}

void Service::bind() {
  if (bound_port_ >= 0) return;
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.host);
  } else {
    bound_port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (bound_port_ < 0) {
    throw Error("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

int Service::start() {
  bind();
  start_timer();
  listen_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound_port_;
}

void Service::run() {
  bind();
  start_timer();
  server_->listen_after_bind();
}

void Service::start_timer() {
  if (timer_thread_.joinable()) return;
  timer_thread_ = std::thread([this] { timer_loop(); });
}

void Service::timer_loop() {
  const auto tick = std::chrono::milliseconds(
      std::clamp<std::int64_t>(config_.confirmation_timeout_ms / 20, 1, 25));
  std::unique_lock lock(timer_mutex_);
  while (!stopping_) {
    timer_cv_.wait_for(lock, tick);
    if (stopping_) break;
    lock.unlock();
    for (const auto& id : store_->sessions_in_confirmation()) {
      try {
        store_->expire(id, clock_(), config_.confirmation_timeout_ms);
      } catch (const std::exception&) {
        // raced with a client continue; nothing to do
      }
    }
    lock.lock();
  }
}

void Service::stop() {
  {
    std::lock_guard lock(timer_mutex_);
    stopping_ = true;
  }
  timer_cv_.notify_all();
  if (server_) server_->stop();
  if (listen_thread_.joinable()) listen_thread_.join();
  if (timer_thread_.joinable()) timer_thread_.join();
}

}  // namespace extrans::gateway
