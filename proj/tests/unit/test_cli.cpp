#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "heatplan/cli/config.hpp"
#include "heatplan/cli/render.hpp"
#include "heatplan/cli/run.hpp"
#include "heatplan/field_io.hpp"

using namespace heatplan;
using namespace heatplan::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("heatplan_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

}  // namespace

TEST_CASE("config defaults mirror module defaults") {
  const auto c = config_from_json(default_config_json());
  CHECK(c.map == grid::MapGenConfig{});
  CHECK(c.schedule.T == 10);
  CHECK(c.schedule.k_min == 12.5);
  CHECK(c.schedule.k_max == 3612.5);
  CHECK(c.kernel.h == 2.0);
  CHECK(c.sampler.epsilon == 0.0008);
  CHECK(c.sampler.inner_iters == 100);
  CHECK(c.sampler.mode == sampler::Mode::kModified);
  CHECK(c.eval.n_episodes == 100);
  CHECK(c.eval.success_radius == 3.0);
  CHECK(c.models == eval::model_names());
}

TEST_CASE("config merge: file, overrides and rejection of unknown keys") {
  const auto j = effective_config(R"({"sampler": {"epsilon": 0.002}, "map": {"scenario_kind": "multimodal"}})",
                                  {"kernel.T=6", "sampler.mode=standard", "map.n_obstacles=[1,2]"});
  const auto c = config_from_json(j);
  CHECK(c.sampler.epsilon == 0.002);
  CHECK(c.map.scenario_kind == grid::ScenarioKind::kMultimodal);
  CHECK(c.schedule.T == 6);
  CHECK(c.sampler.mode == sampler::Mode::kStandard);
  CHECK(c.map.n_obstacles == grid::IntRange{1, 2});
  CHECK(j["sampler"]["epsilon"] == 0.002);

  CHECK_THROWS_AS(effective_config(R"({"sampler": {"epsilon": 0.1, "temperature": 1}})", {}), ConfigError);
  CHECK_THROWS_AS(effective_config("", {"sampler.temperature=1"}), ConfigError);
  CHECK_THROWS_AS(effective_config("", {"sampler.epsilon"}), ConfigError);
  CHECK_THROWS_AS(effective_config("", {"sampler.epsilon=fast"}), ConfigError);
  CHECK_THROWS_AS(effective_config("{not json", {}), ConfigError);
  CHECK_THROWS_AS(config_from_json(effective_config("", {"sampler.epsilon=-1"})), ConfigError);
  CHECK_THROWS_AS(config_from_json(effective_config("", {"map.scenario_kind=spiral"})), ConfigError);
}

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
  const auto bad_flag = call({"sample", "--bogus"});
  CHECK(bad_flag.code == 2);
  CHECK_FALSE(bad_flag.err.empty());
  CHECK(call({"sample", "nokey.x=1"}).code == 2);
  CHECK(call({"sample", "--threads", "0", "--out", scratch("zero").string()}).code == 2);
  const auto missing = call({"eval", "--config", "/nonexistent/c.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/c.json") != std::string::npos);
  const auto help = call({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("genmap") != std::string::npos);
}

TEST_CASE("genmap and kernel outputs") {
  const auto dir = scratch("genmap");
  REQUIRE(call({"genmap", "--seed", "5", "--out", dir.string()}).code == 0);
  const auto map = grid::load_map(slurp(dir / "map.pgm"));
  const auto sc = grid::load_scenario_json(slurp(dir / "scenario.json"), map);
  CHECK(sc == grid::generate_scenario(grid::MapGenConfig{}, 5));
  const auto meta = nlohmann::json::parse(slurp(dir / "genmap.json"));
  CHECK(meta["seed"] == 5);
  CHECK(meta["config"]["sampler"]["epsilon"] == 0.0008);
  CHECK_FALSE(meta["config"].contains("threads"));

  REQUIRE(call({"kernel", "--seed", "5", "--out", dir.string(), "kernel.T=3", "kernel.k_max=100"}).code == 0);
  for (const char* f : {"p0.hkf", "pt_01.hkf", "pt_03.hkf", "score_03.hkf"}) CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "pt_04.hkf"));
  const auto pt = io::decode_field(slurp(dir / "pt_03.hkf"));
  CHECK(pt.channels == 1);
  double total = 0;
  for (double v : pt.values) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(io::decode_field(slurp(dir / "score_03.hkf")).channels == 2);
}

TEST_CASE("sample output is byte identical across runs and thread counts") {
  const auto a = scratch("sample_a");
  const auto b = scratch("sample_b");
  const std::vector<std::string> common{"sampler.n_trajectories=12", "kernel.k_max=400"};
  auto args_a = std::vector<std::string>{"sample", "--seed", "3", "--out", a.string(), "--threads", "1"};
  auto args_b = std::vector<std::string>{"sample", "--seed", "3", "--out", b.string(), "--threads", "3"};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  REQUIRE(call(args_a).code == 0);
  REQUIRE(call(args_b).code == 0);
  CHECK(slurp(a / "trajectories.jsonl") == slurp(b / "trajectories.jsonl"));
  CHECK(slurp(a / "sample.json") == slurp(b / "sample.json"));
  std::istringstream lines(slurp(a / "trajectories.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    sampler::trajectory_from_json(line);
    ++n;
  }
  CHECK(n == 12);
}

TEST_CASE("eval with a config file writes the metrics table") {
  const auto dir = scratch("eval");
  io::write_file((dir / "c.json").string(),
                 R"({"eval": {"n_episodes": 1, "n_samples": 4, "models": ["ours", "bc"], "scenario_kinds": ["unimodal"]}})");
  const auto r = call({"eval", "--config", (dir / "c.json").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(dir / "metrics.csv");
  CHECK(csv.rfind("model,scenario,success_rate,kl_divergence\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.contains("build"));
  CHECK(report["config"]["eval"]["n_samples"] == 4);
  CHECK(report["rows"].size() == 2);
}

TEST_CASE("render contracts") {
  grid::GridMap m(5, 4);
  const auto blank = render_ppm(m, {}, nullptr, {});
  const std::string header = "P6\n5 4\n255\n";
  REQUIRE(blank.rfind(header, 0) == 0);
  CHECK(blank.size() == header.size() + 60);
  CHECK(blank.substr(header.size()) == std::string(60, '\xff'));

  m.set_obstacle({2, 1}, true);
  const auto img = render_ppm(m, {}, nullptr, {});
  const std::size_t px = header.size() + 3 * (1 * 5 + 2);
  CHECK(img.substr(px, 3) == std::string(3, '\0'));

  std::vector<double> wrong(19, 0.0);
  CHECK_THROWS(render_ppm(m, {}, &wrong, {}));

  const auto dir = scratch("render");
  REQUIRE(call({"genmap", "--seed", "2", "--out", dir.string()}).code == 0);
  REQUIRE(call({"sample", "--seed", "2", "--out", dir.string(), "sampler.n_trajectories=3", "kernel.k_max=300"}).code == 0);
  const std::vector<std::string> args{"render", "--out", dir.string(), "--map", (dir / "map.pgm").string(),
                                      "--scenario", (dir / "scenario.json").string(), "--trajectories",
                                      (dir / "trajectories.jsonl").string()};
  REQUIRE(call(args).code == 0);
  const auto first = slurp(dir / "render.ppm");
  REQUIRE(call(args).code == 0);
  CHECK(slurp(dir / "render.ppm") == first);
  CHECK(call({"render", "--out", dir.string(), "--scenario", (dir / "scenario.json").string()}).code == 2);
}

TEST_CASE("bench prints one line per stage") {
  const auto r = call({"bench", "--samples", "20", "kernel.k_max=200", "eval.n_episodes=1", "eval.n_samples=2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("stage,ms\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}
