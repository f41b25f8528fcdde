#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "extrans/experiment/manifest.hpp"
#include "extrans/gateway/analysis.hpp"
#include "extrans/gateway/service.hpp"
#include "extrans/gateway/session_store.hpp"
#include "extrans/gateway/stimulus.hpp"
#include "extrans/image_io.hpp"
#include "extrans/scale.hpp"
#include "study_fixture.hpp"
#include "test_support.hpp"

#include <httplib.h>

namespace fs = std::filesystem;
namespace ex = extrans::experiment;
using namespace extrans;
using namespace extrans::gateway;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("extrans-gw-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const Dataset& dataset() {
  static const Dataset ds = extrans::testing::synthetic_dataset(600, 11);
  return ds;
}

ScheduleProvider small_provider() {
  return [](std::uint64_t seed) {
    ex::ScheduleOptions opts;
    opts.practice_trials = 3;
    return std::make_shared<const ex::Schedule>(ex::generate_schedule(dataset(), seed, opts));
  };
}

ex::events::Submit answer(const ex::Session& s, int choice, std::int64_t at = 0) {
  return {s.current_trial()->trial_id, choice, 4, 900, at};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

// ---------------------------------------------------------------- base64

TEST(Base64, KnownVectors) {
  auto enc = [](std::string s) {
    return base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Base64, RoundTripsArbitraryBytes) {
  std::mt19937 gen(5);
  for (int len = 0; len < 70; ++len) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(gen());
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  EXPECT_THROW(base64_decode("ab$c"), FormatError);
}

// ---------------------------------------------------------------- stimuli

TEST(Stimulus, HumanRenderingIsScaleThenTransform) {
  const auto schedule = small_provider()(3);
  for (const auto& t : schedule->trials) {
    const Image shown = render_human_stimulus(dataset(), t);
    TransformSpec spec = t.spec;
    spec.seed = t.display_seed;
    const Image scaled = scale_linear(dataset().records[t.image_index].image, 128, 128);
    EXPECT_EQ(shown, apply_to_image(spec, scaled)) << t.trial_id;
    if (t.spec.kind == TransformKind::kColorFlatten) {
      EXPECT_EQ(shown.width(), 128);
      EXPECT_EQ(shown.height(), 384);
      EXPECT_EQ(shown.channels(), 1);
    } else {
      EXPECT_EQ(shown.width(), 128);
      EXPECT_EQ(shown.height(), 128);
    }
  }
}

// ---------------------------------------------------------------- store

TEST(LogEntry, JsonRoundTrip) {
  LogEntry create{"abc", "create", 10, "human", 77, std::nullopt};
  const auto back = log_entry_from_json(to_json(create));
  EXPECT_EQ(back.agent_id, "human");
  EXPECT_EQ(back.schedule_seed, 77u);
  LogEntry submit{"abc", "submit", 11, "", 0, ex::events::Submit{4, 2, 5, 1234, 11}};
  const auto s = log_entry_from_json(to_json(submit));
  ASSERT_TRUE(s.event);
  const auto& e = std::get<ex::events::Submit>(*s.event);
  EXPECT_EQ(e.trial_id, 4);
  EXPECT_EQ(e.chosen_option, 2);
  EXPECT_EQ(e.confidence, 5);
  EXPECT_EQ(e.reaction_time_ms, 1234);
  EXPECT_THROW(log_entry_from_json(json{{"session_id", "a"}, {"type", "jump"}, {"at_ms", 1}}),
               FormatError);
}

TEST(SessionStore, ReplayReconstructsIdenticalState) {
  TempDir dir;
  const auto log = dir.path() / "events.jsonl";
  std::vector<ex::Session> live;
  {
    SessionStore store(log, small_provider(), false);
    auto a = store.create("human", 1, 100);
    auto b = store.create("human", 2, 101);
    a = store.apply(a.session_id, ex::events::Begin{}, 102);
    b = store.apply(b.session_id, ex::events::Continue{}, 103);
    for (int i = 0; i < 25; ++i) {
      a = store.apply(a.session_id, answer(a, i % 5, 200 + i), 200 + i);
      a = store.apply(a.session_id, ex::events::Timeout{}, 300 + i);
      if (a.state == ex::SessionState::kRest) a = store.apply(a.session_id, ex::events::Continue{}, 400);
    }
    b = store.apply(b.session_id, answer(b, 0, 500), 500);
    live = {*store.get(a.session_id), *store.get(b.session_id)};
  }
  const auto replayed = replay_log(log, small_provider());
  ASSERT_EQ(replayed.size(), 2u);
  for (const auto& s : live) EXPECT_EQ(replayed.at(s.session_id), s);

  SessionStore reopened(log, small_provider(), false);
  for (const auto& s : live) EXPECT_EQ(*reopened.get(s.session_id), s);
}

TEST(SessionStore, RejectedEventsAreNotLogged) {
  TempDir dir;
  const auto log = dir.path() / "events.jsonl";
  SessionStore store(log, small_provider(), false);
  auto s = store.create("human", 1, 0);
  const auto before = slurp(log);
  EXPECT_THROW(store.apply(s.session_id, ex::events::Timeout{}, 1), ex::ProtocolError);
  EXPECT_THROW(store.apply("nope", ex::events::Begin{}, 1), UnknownSessionError);
  EXPECT_EQ(slurp(log), before);
  s = store.apply(s.session_id, ex::events::Begin{}, 2);
  s = store.apply(s.session_id, answer(s, 1), 3);
  const int answered = s.responses.back().trial_id;
  EXPECT_THROW(store.apply(s.session_id, ex::events::Submit{answered, 1, 3, 5, 4}, 4),
               ex::ProtocolError);
  EXPECT_EQ(store.get(s.session_id)->responses.size(), 1u);
}

TEST(SessionStore, KillBetweenEventsLosesAtMostTheInFlightEvent) {
  TempDir dir;
  const auto log = dir.path() / "events.jsonl";
  std::vector<ex::Session> snapshots;
  std::string sid;
  {
    SessionStore store(log, small_provider(), false);
    auto s = store.create("human", 9, 0);
    sid = s.session_id;
    snapshots.push_back(s);
    s = store.apply(sid, ex::events::Begin{}, 1);
    snapshots.push_back(s);
    for (int i = 0; i < 14; ++i) {
      s = store.apply(sid, answer(s, 2, i), 10 + i);
      snapshots.push_back(s);
      s = store.apply(sid, ex::events::Continue{}, 20 + i);
      snapshots.push_back(s);
      if (s.state == ex::SessionState::kRest) {
        s = store.apply(sid, ex::events::Continue{}, 30 + i);
        snapshots.push_back(s);
      }
    }
  }
  const std::string text = slurp(log);
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') ends.push_back(i + 1);
  }
  ASSERT_EQ(ends.size(), snapshots.size());
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const std::size_t start = k == 0 ? 0 : ends[k - 1];
    for (std::size_t cut : {start, start + 1, (start + ends[k]) / 2, ends[k] - 1}) {
      std::ofstream(log, std::ios::binary | std::ios::trunc) << text.substr(0, cut);
      SessionStore store(log, small_provider(), false);
      if (k == 0) {
        EXPECT_FALSE(store.get(sid));
        continue;
      }
      const auto got = store.get(sid);
      ASSERT_TRUE(got);
      EXPECT_EQ(*got, snapshots[k - 1]) << "cut at byte " << cut;
      std::set<int> ids;
      for (const auto& r : got->responses) EXPECT_TRUE(ids.insert(r.trial_id).second);
    }
  }
  // The torn tail is discarded, so the log stays appendable.
  std::ofstream(log, std::ios::binary | std::ios::trunc) << text.substr(0, ends[2] + 7);
  {
    SessionStore store(log, small_provider(), false);
    EXPECT_EQ(fs::file_size(log), ends[2]);
    store.apply(sid, ex::events::Continue{}, 99);
  }
  EXPECT_EQ(replay_log(log, small_provider()).at(sid).cursor, 1u);
}

TEST(SessionStore, CorruptLineInTheMiddleIsAnError) {
  TempDir dir;
  const auto log = dir.path() / "events.jsonl";
  {
    SessionStore store(log, small_provider(), false);
    auto s = store.create("human", 1, 0);
    store.apply(s.session_id, ex::events::Begin{}, 1);
  }
  std::string text = slurp(log);
  text.insert(text.find('\n') + 1, "{not json\n");
  std::ofstream(log, std::ios::binary | std::ios::trunc) << text;
  EXPECT_THROW(replay_log(log, small_provider()), FormatError);
}

TEST(SessionStore, ConcurrentSessionsStayConsistent) {
  TempDir dir;
  const auto log = dir.path() / "events.jsonl";
  SessionStore store(log, small_provider(), false);
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(store.create("human", 4, i).session_id);
  std::vector<std::thread> workers;
  for (const auto& id : ids) {
    workers.emplace_back([&store, id] {
      auto s = store.apply(id, ex::events::Begin{}, 0);
      while (s.state != ex::SessionState::kDone) {
        if (s.state == ex::SessionState::kInTrial) {
          s = store.apply(id, answer(s, 0), 1);
        } else {
          s = store.apply(id, ex::events::Continue{}, 2);
        }
      }
    });
  }
  // A second writer hammering the same session gets serialized: only
  // one of them can win each transition.
  std::atomic<int> wins{0};
  std::thread racer([&] {
    for (int i = 0; i < 200; ++i) {
      try {
        store.apply(ids[0], ex::events::Continue{}, 3);
        ++wins;
      } catch (const ex::ProtocolError&) {
      }
    }
  });
  for (auto& w : workers) w.join();
  racer.join();
  const auto replayed = replay_log(log, small_provider());
  for (const auto& id : ids) {
    const auto s = store.get(id);
    EXPECT_EQ(s->state, ex::SessionState::kDone);
    EXPECT_EQ(s->responses.size(), s->total());
    EXPECT_EQ(replayed.at(id), *s);
  }
}

TEST(SessionStore, ExpireRespectsTheTimeout) {
  TempDir dir;
  SessionStore store(dir.path() / "e.jsonl", small_provider(), false);
  auto s = store.create("human", 1, 0);
  s = store.apply(s.session_id, ex::events::Begin{}, 0);
  s = store.apply(s.session_id, answer(s, 0), 1000);
  EXPECT_FALSE(store.expire(s.session_id, 3999, 3000));
  const auto fired = store.expire(s.session_id, 4000, 3000);
  ASSERT_TRUE(fired);
  EXPECT_EQ(fired->state, ex::SessionState::kInTrial);
  EXPECT_FALSE(store.expire(s.session_id, 9000, 3000));
}

// ---------------------------------------------------------------- config

TEST(ServiceConfig, Validation) {
  TempDir dir;
  ServiceConfig c;
  c.data_dir = dir.path() / "data";
  EXPECT_EQ(c.confirmation_timeout_ms, 3000);
  EXPECT_NO_THROW(c.validate());
  c.confirmation_timeout_ms = 0;
  EXPECT_THROW(c.validate(), SpecError);
  c.confirmation_timeout_ms = 3000;
  c.trials_per_condition = 2;
  c.practice_trials = 4;
  const auto opts = c.schedule_options();
  EXPECT_EQ(opts.expected_test_trials, 38);
  EXPECT_EQ(opts.practice_trials, 4);
  ServiceConfig blocked;
  std::ofstream(dir.path() / "file") << "x";
  blocked.data_dir = dir.path() / "file" / "sub";
  EXPECT_THROW(blocked.validate(), Error);
}

TEST(ServiceConfig, ListenAddressAndEnvironment) {
  ServiceConfig c;
  parse_listen_address("0.0.0.0:9001", c);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9001);
  parse_listen_address(":9002", c);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9002);
  EXPECT_THROW(parse_listen_address("host:abc", c), SpecError);
  EXPECT_THROW(parse_listen_address("host:70000", c), SpecError);
  ::setenv(kListenEnvVar, "127.0.0.2:7000", 1);
  apply_environment(c);
  ::unsetenv(kListenEnvVar);
  EXPECT_EQ(c.host, "127.0.0.2");
  EXPECT_EQ(c.port, 7000);
}

// ---------------------------------------------------------------- http

namespace {

struct Server {
  explicit Server(std::int64_t timeout_ms = 3000, int practice = 17) {
    ServiceConfig c;
    c.port = 0;
    c.data_dir = dir.path();
    c.fsync = false;
    c.seed_policy = SeedPolicy::kFixed;
    c.fixed_seed = 21;
    c.practice_trials = practice;
    c.confirmation_timeout_ms = timeout_ms;
    service = std::make_unique<Service>(c, dataset());
    port = service->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  json post(const std::string& path, const json& body, int expect) {
    auto res = client->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return res->body.empty() ? json() : json::parse(res->body);
  }
  json get(const std::string& path, int expect = 200) {
    auto res = client->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return json::parse(res->body);
  }
  std::string create() { return post("/sessions", {{"agent_id", "human"}}, 201)["session_id"]; }

  TempDir dir;
  std::unique_ptr<Service> service;
  int port = 0;
  std::unique_ptr<httplib::Client> client;
};

}  // namespace

TEST(Http, CreateAndCurrent) {
  Server srv;
  const auto created = srv.post("/sessions", {{"agent_id", "human"}}, 201);
  EXPECT_EQ(created["state"], "instructions");
  EXPECT_FALSE(created["instructions"].get<std::string>().empty());
  const std::string id = created["session_id"];
  auto cur = srv.get("/sessions/" + id + "/current");
  EXPECT_EQ(cur["state"], "instructions");
  EXPECT_TRUE(cur["image"].is_null());
  EXPECT_EQ(cur["total"], 110);
  srv.post("/sessions", json::object(), 422);
  srv.post("/sessions", {{"agent_id", 5}}, 422);
  srv.get("/sessions/missing/current", 404);
  srv.post("/sessions/missing/response", {{"choice_index", 0}, {"confidence", 3}, {"reaction_time_ms", 5}}, 404);
  srv.post("/sessions/missing/continue", json::object(), 404);
  srv.get("/sessions/missing/export", 404);
}

TEST(Http, CurrentIsIdempotentAndImageReproducible) {
  Server srv;
  const auto id = srv.create();
  srv.post("/sessions/" + id + "/continue", json::object(), 200);
  const auto a = srv.get("/sessions/" + id + "/current");
  const auto b = srv.get("/sessions/" + id + "/current");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["state"], "in_trial");
  EXPECT_EQ(a["phase"], "practice");
  EXPECT_EQ(a["trial_index"], 0);
  EXPECT_EQ(a["options"].size(), 5u);
  EXPECT_TRUE(a["practice_feedback_enabled"].get<bool>());

  const auto png = base64_decode(a["image"].get<std::string>());
  const Image decoded = decode_image(png);
  const auto schedule = srv.service->schedule_for(21);
  const auto& trial = schedule->trials[0];
  TransformSpec spec = trial.spec;
  spec.seed = trial.display_seed;
  const Image local = apply_to_image(spec, scale_linear(dataset().records[trial.image_index].image, 128, 128));
  EXPECT_EQ(decoded, local);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a["options"][k], dataset().fine_name(trial.options[k]));
  }
}

TEST(Http, ResponseValidation) {
  Server srv;
  const auto id = srv.create();
  const std::string path = "/sessions/" + id + "/response";
  srv.post(path, {{"choice_index", 0}, {"confidence", 3}, {"reaction_time_ms", 10}}, 409);
  srv.post("/sessions/" + id + "/continue", json::object(), 200);
  srv.post(path, {{"choice_index", 5}, {"confidence", 3}, {"reaction_time_ms", 10}}, 422);
  srv.post(path, {{"choice_index", -1}, {"confidence", 3}, {"reaction_time_ms", 10}}, 422);
  srv.post(path, {{"choice_index", 1}, {"confidence", 0}, {"reaction_time_ms", 10}}, 422);
  srv.post(path, {{"choice_index", 1}, {"confidence", 6}, {"reaction_time_ms", 10}}, 422);
  srv.post(path, {{"choice_index", "1"}, {"confidence", 3}, {"reaction_time_ms", 10}}, 422);
  srv.post(path, {{"choice_index", 1}, {"confidence", 3}}, 422);
  auto res = srv.client->Post(path, "{broken", "application/json");
  EXPECT_EQ(res->status, 400);
  const auto ok = srv.post(path, {{"choice_index", 1}, {"confidence", 3}, {"reaction_time_ms", 10}}, 200);
  EXPECT_TRUE(ok["accepted"].get<bool>());
  EXPECT_EQ(ok["next_state"], "confirmation");
  EXPECT_TRUE(ok.contains("correct"));
  srv.post(path, {{"choice_index", 2}, {"confidence", 3}, {"reaction_time_ms", 10}}, 409);
  EXPECT_EQ(srv.service->store().get(id)->responses.size(), 1u);
}

TEST(Http, StaleTrialIdIsRejected) {
  Server srv;
  const auto id = srv.create();
  srv.post("/sessions/" + id + "/continue", json::object(), 200);
  const int first = srv.get("/sessions/" + id + "/current")["trial_id"];
  srv.post("/sessions/" + id + "/response",
           {{"trial_id", first}, {"choice_index", 0}, {"confidence", 2}, {"reaction_time_ms", 3}}, 200);
  srv.post("/sessions/" + id + "/continue", json::object(), 200);
  srv.post("/sessions/" + id + "/response",
           {{"trial_id", first}, {"choice_index", 0}, {"confidence", 2}, {"reaction_time_ms", 3}}, 409);
}

TEST(Http, FullSessionExportsEveryResponse) {
  Server srv;
  const auto id = srv.create();
  const std::string base = "/sessions/" + id;
  srv.post(base + "/continue", json::object(), 200);
  std::vector<int> rests;
  int answered = 0;
  int answered_test = 0;
  while (true) {
    const auto cur = srv.get(base + "/current");
    const std::string state = cur["state"];
    if (state == "done") break;
    if (state == "rest") {
      EXPECT_TRUE(cur["rest"].get<bool>());
      EXPECT_EQ(cur["progress"]["completed"], answered);
      EXPECT_EQ(cur["progress"]["total"], 110);
      EXPECT_EQ(cur["progress"]["completed_test"], answered_test);
      rests.push_back(answered_test);
      srv.post(base + "/continue", json::object(), 200);
      continue;
    }
    ASSERT_EQ(state, "in_trial");
    EXPECT_EQ(cur["trial_index"], answered);
    EXPECT_FALSE(cur.contains("correct_option"));
    const bool practice = cur["phase"] == "practice";
    EXPECT_EQ(cur["practice_feedback_enabled"].get<bool>(), practice);
    const auto r = srv.post(base + "/response",
                            {{"choice_index", answered % 5}, {"confidence", 1 + answered % 5},
                             {"reaction_time_ms", 800 + answered}},
                            200);
    EXPECT_EQ(r.contains("correct"), practice);
    const auto conf = srv.get(base + "/current");
    EXPECT_EQ(conf["state"], "confirmation");
    EXPECT_EQ(conf.contains("feedback"), practice);
    ++answered;
    if (!practice) ++answered_test;
    srv.post(base + "/continue", json::object(), 200);
  }
  EXPECT_EQ(answered, 110);
  EXPECT_EQ(rests, (std::vector<int>{10, 20, 30, 40, 50, 60, 70, 80, 90}));

  auto res = srv.client->Get(base + "/export");
  ASSERT_TRUE(res);
  std::istringstream lines(res->body);
  const auto records = ex::read_response_log(lines);
  EXPECT_EQ(records.size(), 110u);
  EXPECT_EQ(std::count(res->body.begin(), res->body.end(), '\n'), 110);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].trial_id, static_cast<int>(i));
    EXPECT_EQ(records[i].reaction_time_ms, 800 + static_cast<int>(i));
  }
  EXPECT_NO_THROW(ex::score_human_responses(records, *srv.service->schedule_for(21)));

  const auto replayed = replay_log(srv.service->config().log_path(),
                                   [&](std::uint64_t seed) { return srv.service->schedule_for(seed); });
  EXPECT_EQ(replayed.at(id), *srv.service->store().get(id));
}

TEST(Http, ConfirmationAutoAdvances) {
  Server srv(150, 2);
  const auto id = srv.create();
  const std::string base = "/sessions/" + id;
  srv.post(base + "/continue", json::object(), 200);
  const auto start = std::chrono::steady_clock::now();
  srv.post(base + "/response", {{"choice_index", 0}, {"confidence", 3}, {"reaction_time_ms", 1}}, 200);
  std::string state = "confirmation";
  while (state == "confirmation" && std::chrono::steady_clock::now() - start < std::chrono::seconds(5)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    state = srv.get(base + "/current")["state"];
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(state, "in_trial");
  EXPECT_GE(elapsed, 140);
  EXPECT_LT(elapsed, 1500);
  // The client's own continue now finds nothing to confirm.
  srv.post(base + "/continue", json::object(), 409);
}

TEST(Http, RestartReplaysSessions) {
  TempDir dir;
  ServiceConfig c;
  c.port = 0;
  c.data_dir = dir.path();
  c.fsync = false;
  c.seed_policy = SeedPolicy::kFixed;
  c.fixed_seed = 5;
  std::string id;
  json before;
  {
    Service service(c, dataset());
    httplib::Client client("127.0.0.1", service.start());
    id = json::parse(client.Post("/sessions", R"({"agent_id":"p1"})", "application/json")->body)["session_id"];
    client.Post("/sessions/" + id + "/continue", "", "application/json");
    client.Post("/sessions/" + id + "/response", R"({"choice_index":3,"confidence":2,"reaction_time_ms":77})",
                "application/json");
    before = json::parse(client.Get("/sessions/" + id + "/current")->body);
  }
  Service service(c, dataset());
  httplib::Client client("127.0.0.1", service.start());
  const auto after = json::parse(client.Get("/sessions/" + id + "/current")->body);
  EXPECT_EQ(after, before);
  EXPECT_TRUE(fs::exists(dir.path() / "schedules" / "5.json"));
}

// ---------------------------------------------------------------- analysis

TEST(Analysis, JoinRequiresEveryAgent) {
  const auto schedule = small_provider()(8);
  const auto fixture = extrans::testing::study_responses(*schedule);
  const auto human = ex::score_human_responses(fixture.human, *schedule);
  std::ostringstream csv;
  ex::write_network_responses(csv, fixture.networks);
  std::istringstream in(csv.str());
  auto networks = ex::load_network_responses(in, *schedule);
  EXPECT_EQ(join_correctness(*schedule, human, networks).rows.size(), 372u);
  networks.erase(Agent::kResNet101);
  try {
    join_correctness(*schedule, human, networks);
    FAIL() << "expected GapError";
  } catch (const ex::GapError& e) {
    ASSERT_FALSE(e.gaps().empty());
    EXPECT_EQ(e.gaps().front().first, Agent::kResNet101);
  }
}

TEST(Analysis, ReproducesReferenceReports) {
  const auto schedule = small_provider()(8);
  const auto fixture = extrans::testing::study_responses(*schedule);
  const auto human = ex::score_human_responses(fixture.human, *schedule);
  std::ostringstream csv;
  ex::write_network_responses(csv, fixture.networks);
  std::istringstream in(csv.str());
  const auto result =
      analyze(join_correctness(*schedule, human, ex::load_network_responses(in, *schedule)));
  ASSERT_EQ(result.reports.size(), 8u);
  for (const auto& expected : extrans::testing::reference_ols()) {
    SCOPED_TRACE(expected.family);
    const auto it = std::find_if(result.reports.begin(), result.reports.end(),
                                 [&](const auto& r) { return r.family.name == expected.family; });
    ASSERT_NE(it, result.reports.end());
    const auto& r = it->report;
    EXPECT_EQ(r.n, expected.n);
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(r.coef[j], expected.coef[j], 5e-5);
      EXPECT_NEAR(r.std_err[j], expected.std_err[j], 5e-4);
    }
    EXPECT_NEAR(r.r_squared, expected.r_squared, 5e-4);
    EXPECT_NEAR(r.adj_r_squared, expected.adj_r_squared, 5e-4);
    EXPECT_NEAR(r.f_statistic, expected.f_statistic, 5e-3 * expected.f_statistic);
    EXPECT_NEAR(r.f_p_value, expected.f_p_value, 5e-3 * expected.f_p_value);
    EXPECT_NEAR(r.log_likelihood, expected.log_likelihood, 5e-3);
    EXPECT_NEAR(r.aic, expected.aic, 0.05);
    EXPECT_NEAR(r.bic, expected.bic, 0.05);
    ASSERT_TRUE(r.jarque_bera);
    EXPECT_NEAR(r.jarque_bera->skew, expected.skew, 5e-4);
    EXPECT_NEAR(r.jarque_bera->kurtosis, expected.kurtosis, 5e-4);
    EXPECT_NEAR(r.jarque_bera->statistic, expected.jarque_bera, 5e-3);
    EXPECT_NEAR(r.jarque_bera->p_value, expected.jb_p_value, 5e-3 * expected.jb_p_value);
    EXPECT_NEAR(r.condition_number, 4.79, 5e-3);
  }
}

TEST(Analysis, WritesReportFiles) {
  TempDir dir;
  const auto result = analyze(extrans::testing::study_table());
  write_analysis(result, dir.path() / "out");
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "accuracy.csv"));
  for (const auto& f : stats::report_families()) {
    EXPECT_TRUE(fs::exists(dir.path() / "out" / ("ols_" + f.name + ".json"))) << f.name;
    EXPECT_TRUE(fs::exists(dir.path() / "out" / ("ols_" + f.name + ".txt"))) << f.name;
  }
  const auto all = json::parse(slurp(dir.path() / "out" / "reports.json"));
  EXPECT_EQ(all["families"].size(), 8u);
}
