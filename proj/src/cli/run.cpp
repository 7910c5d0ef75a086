#include "heatplan/cli/run.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "heatplan/cli/config.hpp"
#include "heatplan/cli/render.hpp"
#include "heatplan/field_io.hpp"
#include "heatplan/parallel.hpp"

#ifndef HEATPLAN_BUILD_ID
#define HEATPLAN_BUILD_ID "unknown"
#endif

namespace heatplan::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;
  std::vector<std::string> overrides;
};

struct RenderArgs {
  std::string map_path;
  std::string scenario_path;
  std::string field_path;
  std::string trajectories_path;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::string command;
  Common common;
  ordered_json config_json;
  RunConfig config;
  int threads = 1;
  std::ostream* out = nullptr;

  fs::path path(const std::string& name) const { return fs::path(common.out_dir) / name; }

  void write(const std::string& name, std::string_view bytes) const { io::write_file(path(name).string(), bytes); }

  ordered_json metadata() const {
    ordered_json j;
    j["command"] = command;
    j["seed"] = common.seed;
    j["build"] = HEATPLAN_BUILD_ID;
    j["config"] = config_json;
    return j;
  }

  void write_meta(ordered_json extra) const {
    ordered_json j = metadata();
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write(command + ".json", j.dump(2) + "\n");
  }
};

std::string level_name(const std::string& stem, int t, const char* ext) {
  std::ostringstream ss;
  ss << stem << '_' << std::setw(2) << std::setfill('0') << t << ext;
  return ss.str();
}

io::FieldDump scalar_dump(const kernel::ProbabilityField& p) {
  return {static_cast<std::uint32_t>(p.width()), static_cast<std::uint32_t>(p.height()), 1,
          std::vector<double>(p.values().begin(), p.values().end())};
}

io::FieldDump vector_dump(const score::ScoreField& f) {
  io::FieldDump d{static_cast<std::uint32_t>(f.width()), static_cast<std::uint32_t>(f.height()), 2, {}};
  d.values.reserve(2 * f.vectors().size());
  for (const auto& v : f.vectors()) {
    d.values.push_back(v.x);
    d.values.push_back(v.y);
  }
  return d;
}

grid::Scenario scenario_of(const Context& ctx) { return grid::generate_scenario(ctx.config.map, ctx.common.seed); }

int cmd_genmap(const Context& ctx) {
  const auto sc = scenario_of(ctx);
  ctx.write("map.pgm", grid::save_map(sc.map));
  ctx.write("scenario.json", grid::save_scenario_json(sc));
  ctx.write_meta({{"outputs", {"map.pgm", "scenario.json"}}});
  return 0;
}

int cmd_kernel(const Context& ctx) {
  const auto sc = scenario_of(ctx);
  const auto& c = ctx.config;
  const auto p0 = kernel::goal_distribution(sc, c.kernel, kernel::GoalSubset::kAll);
  const auto stack = kernel::perturbed_stack(p0, c.schedule, sc.map, c.kernel);
  ordered_json outputs = ordered_json::array({"p0.hkf"});
  ctx.write("p0.hkf", io::encode_field(scalar_dump(p0)));
  ordered_json levels = ordered_json::array();
  for (int t = 1; t <= c.schedule.T; ++t) {
    const auto& pt = stack[static_cast<std::size_t>(t - 1)];
    const auto pname = level_name("pt", t, ".hkf");
    const auto sname = level_name("score", t, ".hkf");
    ctx.write(pname, io::encode_field(scalar_dump(pt)));
    ctx.write(sname, io::encode_field(vector_dump(score::score_field(pt))));
    outputs.push_back(pname);
    outputs.push_back(sname);
    levels.push_back({{"t", t},
                      {"k", c.schedule.k(t)},
                      {"steps", heat::steps_for_dispersion_time(c.schedule.k(t), c.kernel.solver)},
                      {"lambda", sampler::lambda(t, c.schedule, sc.map.width())},
                      {"alpha", sampler::alpha(t, c.schedule, c.sampler, sc.map.width())}});
  }
  ctx.write_meta({{"levels", levels}, {"outputs", outputs}});
  return 0;
}

int cmd_sample(const Context& ctx) {
  const auto sc = scenario_of(ctx);
  const auto& c = ctx.config;
  const auto provider = sampler::exact_provider(sc, c.schedule, c.kernel);
  const auto n = static_cast<std::size_t>(c.n_trajectories);
  std::vector<std::string> lines(n);
  std::vector<State> finals(n);
  std::vector<std::uint8_t> frozen(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const auto seed = eval::sample_seed(ctx.common.seed, 0, i);
    const auto traj =
        sampler::sample_trajectory(sc, *provider, eval::initial_state(sc, seed), c.schedule, c.sampler, seed);
    lines[i] = sampler::trajectory_to_json(traj);
    finals[i] = traj.final_state();
    frozen[i] = traj.frozen;
  });
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  ctx.write("trajectories.jsonl", body);
  std::size_t n_frozen = 0;
  for (auto f : frozen) n_frozen += f;
  ctx.write_meta({{"outputs", {"trajectories.jsonl"}},
                  {"trajectories", n},
                  {"frozen", n_frozen},
                  {"success_rate", eval::success_rate(finals, sc, c.eval.success_radius)}});
  return 0;
}

int cmd_train(const Context& ctx) {
  const auto sc = scenario_of(ctx);
  const auto& c = ctx.config;
  auto tc = c.train;
  tc.seed = ctx.common.seed;
  tc.threads = ctx.threads;
  const auto result = scorematch::train(sc, c.schedule, c.kernel, tc);

  fs::create_directories(ctx.path("model"));
  ordered_json outputs = ordered_json::array();
  for (int t = 1; t <= c.schedule.T; ++t) {
    const auto name = "model/" + level_name("level", t, ".hkf");
    ctx.write(name, io::encode_field(scorematch::level_dump(result.model, t)));
    outputs.push_back(name);
  }
  ctx.write("model/manifest.json", scorematch::manifest_json(result.model, c.schedule));
  outputs.push_back("model/manifest.json");

  std::ostringstream loss;
  loss << "iteration,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) loss << i << ',' << result.loss_history[i] << '\n';
  ctx.write("loss.csv", loss.str());
  outputs.push_back("loss.csv");

  const auto p0 = kernel::goal_distribution(sc, c.kernel, kernel::GoalSubset::kAll);
  const auto stack = kernel::perturbed_stack(p0, c.schedule, sc.map, c.kernel);
  ordered_json cosine = ordered_json::array();
  for (int t = 1; t <= c.schedule.T; ++t) {
    const auto& pt = stack[static_cast<std::size_t>(t - 1)];
    std::vector<std::uint8_t> mask(pt.values().size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = !sc.map.obstacle_mask()[i] && pt.values()[i] > 1e-6;
    cosine.push_back(scorematch::field_cosine(result.model.level(t), score::score_field(pt).vectors(), mask));
  }
  const auto trend = scorematch::loss_trend(result.loss_history, 100);
  ctx.write_meta({{"outputs", outputs},
                  {"kernel_builds", result.kernel_builds},
                  {"cosine_by_level", cosine},
                  {"loss_non_increasing", trend.non_increasing}});
  return 0;
}

int cmd_eval(const Context& ctx) {
  const auto& c = ctx.config;
  std::vector<std::unique_ptr<eval::PlannerModel>> owned;
  std::vector<const eval::PlannerModel*> models;
  for (const auto& name : c.models) {
    owned.push_back(eval::make_model(name, c.model_settings()));
    models.push_back(owned.back().get());
  }
  eval::BenchmarkRequest req;
  req.map = c.map;
  req.eval = c.eval;
  req.eval.base_seed = ctx.common.seed;
  req.kernel = c.kernel;
  req.kinds = c.scenario_kinds;
  req.threads = ctx.threads;
  const auto table = eval::run_benchmark(models, req);
  ctx.write("metrics.csv", table.to_csv());

  ordered_json rows = ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"model", r.model},
                    {"scenario", r.scenario},
                    {"success_rate", r.success_rate},
                    {"kl_divergence", r.kl_divergence},
                    {"samples", r.samples},
                    {"frozen", r.frozen},
                    {"near_unreachable", r.near_unreachable},
                    {"proposals", r.proposals},
                    {"rejections", r.rejections},
                    {"states_checked", r.states_checked},
                    {"states_in_collision", r.states_in_collision},
                    {"failed_episodes", r.failed_episodes},
                    {"success_by_goal", r.success_by_goal}});
  }
  ordered_json report = ctx.metadata();
  report["rows"] = rows;
  ctx.write("report.json", report.dump(2) + "\n");
  ctx.write_meta({{"outputs", {"metrics.csv", "report.json"}}});
  return 0;
}

int cmd_render(const Context& ctx, const RenderArgs& ra) {
  std::optional<grid::Scenario> generated;
  std::optional<grid::GridMap> map;
  std::vector<grid::Goal> goals;
  if (!ra.map_path.empty()) {
    map = grid::load_map(io::read_file(ra.map_path));
    if (!ra.scenario_path.empty()) goals = grid::load_scenario_json(io::read_file(ra.scenario_path), *map).goals;
  } else {
    if (!ra.scenario_path.empty()) throw UsageError("--scenario needs --map");
    generated = scenario_of(ctx);
    map = generated->map;
    goals = generated->goals;
  }
  std::optional<std::vector<double>> field;
  if (!ra.field_path.empty()) {
    auto d = io::decode_field(io::read_file(ra.field_path));
    if (d.channels != 1) throw InvalidArgument("render: field '" + ra.field_path + "' must have one channel");
    if (static_cast<int>(d.width) != map->width() || static_cast<int>(d.height) != map->height())
      throw InvalidArgument("render: field '" + ra.field_path + "' does not match the map dimensions");
    field = std::move(d.values);
  }
  std::vector<sampler::Trajectory> trajs;
  if (!ra.trajectories_path.empty()) {
    std::istringstream in(io::read_file(ra.trajectories_path));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) trajs.push_back(sampler::trajectory_from_json(line));
  }
  ctx.write("render.ppm", render_ppm(*map, goals, field ? &*field : nullptr, trajs));
  ctx.write_meta({{"outputs", {"render.ppm"}},
                  {"inputs",
                   {{"map", ra.map_path},
                    {"scenario", ra.scenario_path},
                    {"field", ra.field_path},
                    {"trajectories", ra.trajectories_path}}}});
  return 0;
}

int cmd_bench(const Context& ctx, int n_samples) {
  using clock = std::chrono::steady_clock;
  const auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  const auto& c = ctx.config;
  const auto sc = scenario_of(ctx);
  auto t0 = clock::now();
  const auto provider = sampler::exact_provider(sc, c.schedule, c.kernel);
  auto t1 = clock::now();
  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<std::uint8_t> frozen(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const auto seed = eval::sample_seed(ctx.common.seed, 0, i);
    frozen[i] = sampler::sample_trajectory(sc, *provider, eval::initial_state(sc, seed), c.schedule, c.sampler, seed)
                    .frozen;
  });
  auto t2 = clock::now();
  const auto model = eval::make_ours(c.model_settings());
  eval::BenchmarkRequest req;
  req.map = c.map;
  req.eval = c.eval;
  req.eval.base_seed = ctx.common.seed;
  req.kernel = c.kernel;
  req.kinds = {c.map.scenario_kind};
  req.threads = ctx.threads;
  eval::run_benchmark({model.get()}, req);
  auto t3 = clock::now();
  auto& out = *ctx.out;
  out << std::fixed << std::setprecision(1);
  out << "stage,ms\n";
  out << "kernel_stack," << ms(t0, t1) << '\n';
  out << "sample_" << n << "," << ms(t1, t2) << '\n';
  out << "eval_row_ours_" << grid::to_string(c.map.scenario_kind) << ',' << ms(t2, t3) << '\n';
  return 0;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (flag < 0) throw UsageError("--threads must be >= 1");
  if (const char* env = std::getenv("HEATPLAN_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw UsageError("HEATPLAN_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return hardware_threads();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collision-avoiding heat-kernel diffusion planner", "heatplan"};
  app.require_subcommand(1);
  Common common;
  RenderArgs ra;
  int bench_samples = 10000;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"genmap", "Generate a scenario map (PGM) and its sidecar JSON"},
      {"kernel", "Write p0, p_t and score fields for every level (HKF1)"},
      {"sample", "Sample trajectories with the exact collision-avoiding score (JSONL)"},
      {"train", "Fit the tabulated score model by denoising score matching"},
      {"eval", "Run the benchmark and write metrics CSV/JSON"},
      {"render", "Render a map with optional field and trajectories (PPM)"},
      {"bench", "Print per-stage timings in milliseconds"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--seed", common.seed, "Scenario / base seed");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--threads", common.threads, "Worker threads (default: HEATPLAN_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("overrides", common.overrides, "Config overrides, e.g. sampler.epsilon=0.0008");
    if (name == "render") {
      sub->add_option("--map", ra.map_path, "Map PGM (default: generated from config and seed)");
      sub->add_option("--scenario", ra.scenario_path, "Scenario JSON for the goals");
      sub->add_option("--field", ra.field_path, "Single-channel HKF1 field");
      sub->add_option("--trajectories", ra.trajectories_path, "Trajectory JSONL");
    }
    if (name == "bench") sub->add_option("--samples", bench_samples, "Trajectories in the sampling stage")->check(CLI::PositiveNumber);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "heatplan: " << e.what() << "\n" << app.help();
    return 2;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.common = common;
  ctx.out = &out;
  try {
    const std::string text = common.config_path.empty() ? std::string() : io::read_file(common.config_path);
    ctx.config_json = effective_config(text, common.overrides);
    ctx.config = config_from_json(ctx.config_json);
    ctx.threads = resolve_threads(common.threads);
  } catch (const ConfigError& e) {
    err << "heatplan " << ctx.command << ": " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "heatplan " << ctx.command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "heatplan " << ctx.command << ": " << e.what() << "\n";
    return 1;
  }

  try {
    std::error_code ec;
    fs::create_directories(common.out_dir, ec);
    if (ec) throw Error("cannot create output directory '" + common.out_dir + "': " + ec.message());
    if (ctx.command == "genmap") return cmd_genmap(ctx);
    if (ctx.command == "kernel") return cmd_kernel(ctx);
    if (ctx.command == "sample") return cmd_sample(ctx);
    if (ctx.command == "train") return cmd_train(ctx);
    if (ctx.command == "eval") return cmd_eval(ctx);
    if (ctx.command == "render") return cmd_render(ctx, ra);
    return cmd_bench(ctx, bench_samples);
  } catch (const UsageError& e) {
    err << "heatplan " << ctx.command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "heatplan " << ctx.command << ": " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace heatplan::cli
