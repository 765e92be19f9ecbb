#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fanet/cli.hpp"
#include "json.hpp"

using namespace fanet;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "nodes": 2, "arena_x": 100, "arena_y": 100, "arena_z": 10,
  "speed_min": 0, "speed_max": 0, "flows": 1, "duration": 30,
  "routers": ["lb_opar"], "replications": 1, "seed": 9
})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fanet_cli_" + std::to_string(std::random_device{}()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fanet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

std::string config_error_for(const std::string& text) {
  try {
    cli::parse_config(text);
  } catch (const cli::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig cfg = cli::parse_config(kMinimal);
  CHECK(cfg.node_count == 2);
  CHECK(cfg.arena.x_max == 100.0);
  CHECK(cfg.duration == 30.0);
  CHECK(cfg.seed == 9);
  REQUIRE(cfg.routers.size() == 1);
  CHECK(cfg.routers[0].family == RouterFamily::lb_opar);
  CHECK_FALSE(cfg.routers[0].weights.has_value());

  const ScenarioConfig d = cli::parse_config("{}");
  CHECK(d.node_count == 50);
  CHECK(d.routers.size() == 4);
  CHECK(d.replications == 20);

  const ScenarioConfig w = cli::parse_config(
      R"({"weights": [0.2, 0.3, 0.5], "objective": "blp", "proactive_period": 4,
          "flow_list": [{"src": 0, "dst": 3, "file_size": 1000, "start": 2}],
          // comments are allowed
          "mobility": "gauss_markov3d"})");
  CHECK(*w.routers[0].weights == Weights(0.2, 0.3, 0.5));
  CHECK(w.routers[0].objective == Objective::blp);
  CHECK(w.routers[3].refresh_period == 4.0);
  REQUIRE(w.flows.size() == 1);
  CHECK(w.flows[0].dst == 3);
  CHECK(w.flows[0].start_time == 2.0);
  CHECK(w.mobility.model == MobilityModel::gauss_markov3d);
}

TEST_CASE("config errors name the field") {
  CHECK(config_error_for(R"({"nodse": 3})").rfind("nodse", 0) == 0);
  CHECK(config_error_for(R"({"range": "far"})").rfind("range", 0) == 0);
  CHECK(config_error_for(R"({"nodes": -4})").rfind("nodes", 0) == 0);
  CHECK(config_error_for(R"({"duration": 0})").rfind("duration", 0) == 0);
  CHECK(config_error_for(R"({"replications": 0})").rfind("replications", 0) == 0);
  CHECK(config_error_for(R"({"routers": ["aodv"]})").rfind("routers", 0) == 0);
  CHECK(config_error_for(R"({"weights": [0.5, 0.5, 0.5]})").rfind("weights", 0) == 0);
  CHECK(config_error_for(R"({"flow_list": [{"src": 0, "dst": 80}]})").rfind("flow_list[0]", 0) ==
        0);
  CHECK(config_error_for(R"({"flow_list": [{"src": 0, "dst": 1, "size": 3}]})")
            .rfind("flow_list[0].size", 0) == 0);
  CHECK(config_error_for(R"({"mobility": "levy"})").rfind("mobility", 0) == 0);
  CHECK(config_error_for("[1, 2]").rfind("config", 0) == 0);
  CHECK(config_error_for("{nope").rfind("config", 0) == 0);
}

TEST_CASE("trace files resolve next to the config") {
  TempDir dir;
  dir.write("t.trace", "time node x y z\n0 0 0 0 0\n0 1 50 0 0\n");
  dir.write("c.json", R"({"trace_file": "t.trace", "flows": 1, "duration": 10})");
  const ScenarioConfig cfg = cli::load_config(dir.path / "c.json");
  CHECK(cfg.node_count == 2);
  CHECK(cfg.trace.size() == 2);
  CHECK_THROWS_AS(cli::load_config(dir.path / "missing.json"), cli::IoError);
  dir.write("bad.json", R"({"trace_file": "nowhere.trace"})");
  CHECK_THROWS_AS(cli::load_config(dir.path / "bad.json"), cli::IoError);
}

TEST_CASE("grid specs") {
  const auto w3 = cli::parse_grid("w3");
  REQUIRE(w3.size() == 11);
  for (std::size_t k = 0; k < w3.size(); ++k) {
    CHECK(w3[k].load() == doctest::Approx(k / 10.0));
    CHECK(w3[k].length() == doctest::Approx(w3[k].lifetime()));
  }
  const auto pair = cli::parse_grid("w1w2:0.3");
  REQUIRE(pair.size() == 8);
  CHECK(pair.back().length() == doctest::Approx(0.7));
  CHECK(pair.back().lifetime() == doctest::Approx(0.0).epsilon(1e-9));
  const auto explicit_grid = cli::parse_grid("1,0,0; 0.2,0.3,0.5");
  REQUIRE(explicit_grid.size() == 2);
  CHECK(explicit_grid[1] == Weights(0.2, 0.3, 0.5));
  CHECK_THROWS_AS(cli::parse_grid("1,0"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_grid("0.5,0.5,0.5"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_grid("w1w2:2"), cli::ConfigError);
}

TEST_CASE("result rows round trip exactly") {
  std::vector<cli::ResultRow> rows(3);
  rows[0].router = "lb_opar";
  rows[0].w1 = 0.1;
  rows[0].w2 = 0.2;
  rows[0].w3 = 0.7;
  rows[0].seed = 18446744073709551615ULL;
  rows[0].success_rate = 2.0 / 3.0;
  rows[0].mean_fct = 123.456789012345678;
  rows[0].mean_fct_success = 1e-300;
  rows[1].router = "opar";
  rows[1].mean_throughput_mbps = 3.141592653589793;
  rows[2].router = "reactive_hop";
  rows[2].reroutes = 42;
  rows[2].replication = 19;
  std::stringstream io;
  cli::write_rows(io, rows);
  CHECK(cli::read_rows(io) == rows);

  std::istringstream bad_header("router,w1\n");
  CHECK_THROWS_AS(cli::read_rows(bad_header), cli::IoError);
  std::stringstream short_row;
  cli::write_rows(short_row, {});
  short_row << "x,1,2\n";
  CHECK_THROWS_AS(cli::read_rows(short_row), cli::IoError);
}

TEST_CASE("replications get consecutive seeds") {
  ScenarioConfig cfg = cli::parse_config(kMinimal);
  cfg.replications = 20;
  cfg.routers = default_routers();
  const auto rows = cli::to_rows(cli::run_replications(cfg, 100, 3));
  REQUIRE(rows.size() == 80);
  std::map<std::string, std::set<std::uint64_t>> seeds;
  for (const auto& r : rows) {
    seeds[r.router].insert(r.seed);
    CHECK(r.seed == 100 + r.replication);
  }
  for (const auto& [router, s] : seeds) CHECK(s.size() == 20);
}

TEST_CASE("degenerate sweep equals a plain run") {
  ScenarioConfig cfg = cli::parse_config(R"({"nodes": 20, "flows": 3, "duration": 60,
                                             "replications": 2})");
  const auto sweep = cli::sweep_weights(cfg, {Weights(1, 0, 0)}, 4, 1);
  RouterKind k;
  k.weights = Weights(1, 0, 0);
  cfg.routers = {k};
  const auto plain = cli::to_rows(cli::run_replications(cfg, 4, 1));
  CHECK(sweep.rows == plain);
  CHECK(sweep.points.size() == 1);
}

TEST_CASE("best point ordering") {
  std::vector<cli::SweepPoint> pts(3);
  pts[0].weights = Weights(0.5, 0.5, 0.0);
  pts[1].weights = Weights(0.4, 0.4, 0.2);
  pts[2].weights = Weights(0.3, 0.3, 0.4);
  for (auto& p : pts) p.mean_fct = 10.0;
  CHECK(cli::best_point(pts) == 0);  // full tie goes to the smaller w3
  pts[2].success_rate = 0.5;
  CHECK(cli::best_point(pts) == 2);
  pts[1].mean_fct = 9.0;
  CHECK(cli::best_point(pts) == 1);
}

TEST_CASE("command line") {
  TempDir dir;
  const fs::path cfg = dir.write("min.json", kMinimal);
  const fs::path out = dir.path / "a.csv";

  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", out.string()}) == cli::ok);
  {
    std::ifstream in(out);
    const auto rows = cli::read_rows(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].success_rate == 1.0);
    CHECK(rows[0].seed == 9);
  }
  CHECK(fs::exists(dir.path / "a.flows.csv"));
  const auto meta = nlohmann::json::parse(slurp(dir.path / "a.meta.json"));
  CHECK(meta["command"] == "run");
  CHECK(meta["seeds"][0] == 9);
  CHECK(meta["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);

  SUBCASE("seed override and router list") {
    const fs::path o = dir.path / "b.csv";
    REQUIRE(invoke({"run", "--config", cfg.string(), "--out", o.string(), "--seed", "41",
                    "--routers", "opar,proactive_hop"}) == cli::ok);
    std::ifstream in(o);
    const auto rows = cli::read_rows(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].router == "opar");
    CHECK(rows[1].router == "proactive_hop");
    CHECK(rows[0].seed == 41);
  }

  SUBCASE("byte-identical output regardless of worker count") {
    const fs::path busy = dir.write("busy.json", R"({"nodes": 30, "flows": 6, "duration": 100,
                                                      "replications": 4, "seed": 3})");
    const fs::path o1 = dir.path / "j1.csv";
    const fs::path o3 = dir.path / "j3.csv";
    REQUIRE(invoke({"run", "--config", busy.string(), "--out", o1.string()}) == cli::ok);
    REQUIRE(invoke({"run", "--config", busy.string(), "--out", o3.string(), "--jobs", "3"}) ==
            cli::ok);
    CHECK(slurp(o1) == slurp(o3));
    CHECK(slurp(dir.path / "j1.flows.csv") == slurp(dir.path / "j3.flows.csv"));
  }

  SUBCASE("sweep") {
    const fs::path o = dir.path / "s.csv";
    REQUIRE(invoke({"sweep-weights", "--config", cfg.string(), "--out", o.string(), "--grid",
                    "w3"}) == cli::ok);
    std::ifstream in(o);
    CHECK(cli::read_rows(in).size() == 11);
    CHECK(fs::exists(dir.path / "s.points.csv"));
    const auto m = nlohmann::json::parse(slurp(dir.path / "s.meta.json"));
    CHECK(m["grid"].size() == 11);
    CHECK(m.contains("argmax"));
  }

  SUBCASE("predict-eval on a stationary network") {
    const fs::path p = dir.write("p.json", R"({"nodes": 10, "arena_x": 300, "speed_max": 0,
                                                "warmup": 5, "observe": 50,
                                                "prediction_runs": 3})");
    const fs::path o = dir.path / "p.csv";
    REQUIRE(invoke({"predict-eval", "--config", p.string(), "--out", o.string()}) == cli::ok);
    const auto m = nlohmann::json::parse(slurp(dir.path / "p.meta.json"));
    CHECK(m["summary"]["links"].get<std::size_t>() > 0);
    CHECK(m["summary"]["kinematic"]["mean"] == 0.0);
    CHECK(m["summary"]["extrapolation"]["mean"] == 0.0);
    CHECK(fs::exists(dir.path / "p.links.csv"));
  }

  SUBCASE("exit codes") {
    const fs::path bad = dir.write("bad.json", R"({"nodes": 2, "colour": 1})");
    CHECK(invoke({"run", "--config", bad.string(), "--out", out.string()}) == cli::config_error);
    CHECK(invoke({"run", "--config", (dir.path / "none.json").string(), "--out", out.string()}) ==
          cli::io_error);
    CHECK(invoke({"run", "--config", cfg.string(), "--out",
                  (dir.path / "no" / "such" / "dir.csv").string()}) == cli::io_error);
    CHECK(invoke({"run", "--out", out.string()}) == cli::config_error);
    CHECK(invoke({"walk"}) == cli::config_error);
  }
}
