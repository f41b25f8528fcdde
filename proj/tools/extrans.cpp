#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "extrans/cifar.hpp"
#include "extrans/error.hpp"
#include "extrans/experiment/manifest.hpp"
#include "extrans/experiment/responses.hpp"
#include "extrans/experiment/schedule.hpp"
#include "extrans/gateway/analysis.hpp"
#include "extrans/gateway/service.hpp"
#include "extrans/gateway/stimulus.hpp"
#include "extrans/image_io.hpp"
#include "extrans/synthetic.hpp"
#include "extrans/transforms.hpp"

namespace fs = std::filesystem;
namespace ex = extrans::experiment;
namespace gw = extrans::gateway;
using namespace extrans;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitSpec = 2;
constexpr int kExitGaps = 3;

struct DatasetArgs {
  std::string path;
  std::size_t synthetic = 0;
  std::uint64_t synthetic_seed = 1;

  void add(CLI::App& cmd) {
    cmd.add_option("--dataset", path, "CIFAR-100 test.bin (default: $EXTRANS_CIFAR100_TEST)");
    cmd.add_option("--synthetic", synthetic, "Use N generated images instead of CIFAR-100");
    cmd.add_option("--synthetic-seed", synthetic_seed, "Seed for --synthetic");
  }

  Dataset load() const {
    if (synthetic > 0) return synthetic_dataset(synthetic, synthetic_seed);
    std::string p = path;
    if (p.empty()) {
      if (const char* env = std::getenv("EXTRANS_CIFAR100_TEST")) p = env;
    }
    if (p.empty()) throw Error("no dataset: pass --dataset or --synthetic N");
    return load_cifar100_file(p, Split::kTest);
  }
};

struct ScheduleArgs {
  std::optional<int> practice;
  std::optional<int> per_condition;

  void add(CLI::App& cmd) {
    cmd.add_option("--practice", practice, "Practice trials (default 17)");
    cmd.add_option("--trials-per-condition", per_condition,
                   "Uniform test plan with N trials per condition");
  }

  void apply(gw::ServiceConfig& config) const {
    config.practice_trials = practice;
    config.trials_per_condition = per_condition;
  }
};

ex::Schedule read_schedule(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return ex::schedule_from_json(nlohmann::json::parse(in));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write " + path);
}

// ---- transform -------------------------------------------------------

struct TransformArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string kind;
  int block = 0;
  double prob = 1.0;
  std::uint64_t seed = 0;
  std::string format;
};

fs::path output_for(const TransformArgs& a, const fs::path& input, ImageFormat format) {
  if (a.inputs.size() == 1 && !fs::is_directory(a.output)) return a.output;
  fs::path name = input.filename();
  name.replace_extension(format == ImageFormat::kPng ? ".png" : ".ppm");
  return fs::path(a.output) / name;
}

int run_transform(const TransformArgs& a) {
  const auto kind = parse_kind(a.kind);
  if (!kind) throw SpecError("unknown transform kind '" + a.kind + "'");
  const TransformSpec spec{*kind, uses_blocks(*kind) ? a.block : 0,
                           uses_probability(*kind) ? a.prob : 1.0, a.seed};
  spec.validate();
  std::optional<ImageFormat> forced;
  if (!a.format.empty()) {
    forced = parse_format(a.format);
    if (!forced) throw SpecError("unknown format '" + a.format + "'");
  }
  if (a.inputs.size() > 1) fs::create_directories(a.output);

  std::vector<std::vector<std::uint8_t>> raw;
  std::vector<Image> images;
  std::vector<TransformSpec> specs;
  for (const auto& in : a.inputs) {
    raw.push_back(read_file(in));
    images.push_back(decode_image(raw.back()));
    specs.push_back(spec);
  }
  const auto results = apply_batch(specs, images);

  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const auto input_format = sniff_format(raw[i]);
    ImageFormat format = forced.value_or(input_format.value_or(ImageFormat::kPng));
    if (!forced && a.inputs.size() == 1) {
      if (const auto ext = format_from_extension(a.output)) format = *ext;
    }
    const fs::path out = output_for(a, a.inputs[i], format);
    if (const auto* flat = std::get_if<FlattenedImage>(&results[i])) {
      std::vector<std::uint8_t> planes;
      for (const auto& ch : flat->channels) planes.insert(planes.end(), ch.begin(), ch.end());
      fs::path bin = out;
      bin.replace_extension(".planes.bin");
      write_file(bin, planes);
      write_file(out, encode_image(flatten_visualization(*flat), format));
      continue;
    }
    if (spec.kind == TransformKind::kBaseline && input_format == format) {
      write_file(out, raw[i]);
    } else {
      write_file(out, encode_image(std::get<Image>(results[i]), format));
    }
  }
  return 0;
}

// ---- manifest / schedule / stimuli ----------------------------------

int run_manifest(bool jsonl) {
  const auto manifest = ex::build_manifest();
  if (jsonl) {
    for (const auto& e : manifest.entries) std::cout << ex::to_json(e).dump() << '\n';
  } else {
    std::cout << ex::to_json(manifest).dump(2) << '\n';
  }
  return 0;
}

int run_schedule(const DatasetArgs& data, const ScheduleArgs& sched, std::uint64_t seed,
                 const std::string& output) {
  gw::ServiceConfig config;
  sched.apply(config);
  const auto schedule = ex::generate_schedule(data.load(), seed, config.schedule_options());
  write_text(output, ex::to_json(schedule).dump(2) + "\n");
  return 0;
}

int run_stimuli(const DatasetArgs& data, const std::string& schedule_path, const std::string& out,
                bool human, const std::string& format_name) {
  const auto dataset = data.load();
  const auto schedule = read_schedule(schedule_path);
  const auto format = parse_format(format_name);
  if (!format) throw SpecError("unknown format '" + format_name + "'");
  fs::create_directories(out);
  const char* ext = *format == ImageFormat::kPng ? ".png" : ".ppm";

  std::vector<Image> rendered(schedule.trials.size());
  if (human) {
    for (std::size_t i = 0; i < rendered.size(); ++i) {
      rendered[i] = gw::render_human_stimulus(dataset, schedule.trials[i]);
    }
  } else {
    std::vector<TransformSpec> specs;
    std::vector<Image> images;
    for (const auto& t : schedule.trials) {
      if (t.image_index >= dataset.size()) throw Error("schedule does not match dataset");
      specs.push_back(t.spec);
      images.push_back(dataset.records[t.image_index].image);
    }
    auto results = apply_batch(specs, images);
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (auto* flat = std::get_if<FlattenedImage>(&results[i])) {
        rendered[i] = flatten_visualization(*flat);
      } else {
        rendered[i] = std::move(std::get<Image>(results[i]));
      }
    }
  }
  std::ostringstream index;
  index << "trial_id,phase,file,kind,block_size,probability\n";
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    const auto& t = schedule.trials[i];
    const std::string name = "trial_" + std::to_string(t.trial_id) + ext;
    write_file(fs::path(out) / name, encode_image(rendered[i], *format));
    index << t.trial_id << ',' << ex::phase_name(t.phase) << ',' << name << ','
          << kind_name(t.spec.kind) << ',' << t.spec.block_size << ',' << t.spec.probability << '\n';
  }
  write_text((fs::path(out) / "index.csv").string(), index.str());
  return 0;
}

// ---- analyze ---------------------------------------------------------

int run_analyze(const std::string& schedule_path, const std::string& responses_path,
                const std::string& networks_path, const std::string& out, bool quiet) {
  const auto schedule = read_schedule(schedule_path);
  try {
    std::ifstream log(responses_path);
    if (!log) throw Error("cannot read " + responses_path);
    const auto human = ex::score_human_responses(ex::read_response_log(log), schedule);
    const auto networks = ex::load_network_responses(fs::path(networks_path), schedule);
    const auto result = gw::analyze(gw::join_correctness(schedule, human, networks));
    if (!out.empty()) gw::write_analysis(result, out);
    if (!quiet) {
      std::cout << stats::accuracy_csv(result.accuracy) << '\n';
      for (const auto& fr : result.reports) {
        std::cout << stats::format_report(fr.report, "OLS for " + fr.family.title) << '\n';
      }
    }
  } catch (const ex::GapError& e) {
    std::cerr << "error: incomplete responses\n";
    std::map<std::string, std::vector<int>> by_agent;
    for (const auto& [agent, trial] : e.gaps()) by_agent[std::string(agent_id(agent))].push_back(trial);
    for (const auto& [agent, trials] : by_agent) {
      std::cerr << "  " << agent << ":";
      if (trials.size() == 1 && trials[0] < 0) {
        std::cerr << " no responses";
      } else {
        std::cerr << ' ' << trials.size() << " missing trial(s):";
        for (int t : trials) std::cerr << ' ' << t;
      }
      std::cerr << '\n';
    }
    return kExitGaps;
  }
  return 0;
}

// ---- serve -----------------------------------------------------------

gw::Service* g_service = nullptr;

int run_serve(gw::ServiceConfig config, const DatasetArgs& data, const std::string& listen,
              const std::string& policy, std::optional<std::uint64_t> fixed_seed) {
  if (!listen.empty()) gw::parse_listen_address(listen, config);
  gw::apply_environment(config);
  if (policy == "fixed" || fixed_seed) {
    config.seed_policy = gw::SeedPolicy::kFixed;
    config.fixed_seed = fixed_seed.value_or(0);
  } else if (policy != "per-session") {
    throw SpecError("seed policy must be per-session or fixed");
  }
  gw::Service service(std::move(config), data.load());
  g_service = &service;
  std::signal(SIGINT, [](int) { if (g_service) g_service->stop(); });
  std::signal(SIGTERM, [](int) { if (g_service) g_service->stop(); });
  const int port = service.start();
  std::cout << "listening on http://" << service.config().host << ':' << port << std::endl;
  service.run();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image transforms and human/network recognition experiments"};
  app.require_subcommand(1);

  TransformArgs targs;
  auto* transform = app.add_subcommand("transform", "Apply a transform to image files");
  transform->add_option("--input,-i", targs.inputs, "Input PNG/PPM file(s)")->required();
  transform->add_option("--output,-o", targs.output, "Output file, or directory for several inputs")
      ->required();
  transform->add_option("--kind,-k", targs.kind,
                        "baseline|grid|randomized|within|local|color_flatten")
      ->required();
  transform->add_option("--block,-b", targs.block, "Block size (grid kinds)");
  transform->add_option("--prob,-p", targs.prob, "Shuffle probability")->default_val(1.0);
  transform->add_option("--seed,-s", targs.seed, "Random seed")->default_val(0);
  transform->add_option("--format,-f", targs.format, "png|ppm (default: from output name)");

  bool jsonl = false;
  auto* manifest = app.add_subcommand("manifest", "Print the 18 evaluated transform configurations");
  manifest->add_flag("--jsonl", jsonl, "One entry per line");

  DatasetArgs sched_data;
  ScheduleArgs sched_args;
  std::uint64_t sched_seed = 0;
  std::string sched_out;
  auto* schedule = app.add_subcommand("schedule", "Generate a session schedule");
  sched_data.add(*schedule);
  sched_args.add(*schedule);
  schedule->add_option("--seed", sched_seed, "Schedule seed")->required();
  schedule->add_option("--output,-o", sched_out, "Output file (default stdout)");

  DatasetArgs stim_data;
  std::string stim_schedule, stim_out, stim_format = "png";
  bool stim_human = false;
  auto* stimuli = app.add_subcommand("stimuli", "Render the images of a schedule");
  stim_data.add(*stimuli);
  stimuli->add_option("--schedule", stim_schedule, "Schedule JSON")->required();
  stimuli->add_option("--output,-o", stim_out, "Output directory")->required();
  stimuli->add_flag("--human", stim_human, "128x128 display renderings instead of 32x32 inputs");
  stimuli->add_option("--format,-f", stim_format, "png|ppm");

  std::string an_schedule, an_responses, an_networks, an_out;
  bool an_quiet = false;
  auto* analyze = app.add_subcommand("analyze", "Accuracy tables and OLS reports");
  analyze->add_option("--schedule", an_schedule, "Schedule JSON")->required();
  analyze->add_option("--responses", an_responses, "Human response log (JSON lines)")->required();
  analyze->add_option("--networks", an_networks, "Network responses CSV")->required();
  analyze->add_option("--output,-o", an_out, "Directory for accuracy.csv and ols_*.json/txt");
  analyze->add_flag("--quiet,-q", an_quiet, "Do not print the reports");

  gw::ServiceConfig serve_config;
  DatasetArgs serve_data;
  ScheduleArgs serve_sched;
  std::string listen, policy = "per-session", data_dir = serve_config.data_dir.string(), static_dir;
  std::optional<std::uint64_t> fixed_seed;
  bool no_fsync = false;
  auto* serve = app.add_subcommand("serve", "Run the experiment HTTP server");
  serve_data.add(*serve);
  serve_sched.add(*serve);
  serve->add_option("--listen", listen, "host:port (env EXTRANS_LISTEN overrides)");
  serve->add_option("--data-dir", data_dir, "Event log and schedules");
  serve->add_option("--seed-policy", policy, "per-session|fixed");
  serve->add_option("--schedule-seed", fixed_seed, "Seed for every session (implies fixed)");
  serve->add_option("--timeout-ms", serve_config.confirmation_timeout_ms,
                    "Confirmation auto-advance")
      ->default_val(3000);
  serve->add_flag("--no-fsync", no_fsync, "Skip fsync after each logged event");
  serve->add_option("--static-dir", static_dir, "Serve the browser UI from this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*transform) return run_transform(targs);
    if (*manifest) return run_manifest(jsonl);
    if (*schedule) return run_schedule(sched_data, sched_args, sched_seed, sched_out);
    if (*stimuli) return run_stimuli(stim_data, stim_schedule, stim_out, stim_human, stim_format);
    if (*analyze) return run_analyze(an_schedule, an_responses, an_networks, an_out, an_quiet);
    if (*serve) {
      serve_config.data_dir = data_dir;
      serve_config.dataset_path = serve_data.path;
      serve_config.static_dir = static_dir;
      serve_config.fsync = !no_fsync;
      serve_sched.apply(serve_config);
      return run_serve(std::move(serve_config), serve_data, listen, policy, fixed_seed);
    }
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSpec;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
