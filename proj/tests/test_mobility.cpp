#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fanet/mobility.hpp"

using namespace fanet;

namespace {

MobilityConfig config(MobilityModel model, double vmin, double vmax, std::uint64_t seed = 4) {
  MobilityConfig c;
  c.model = model;
  c.speed_min = vmin;
  c.speed_max = vmax;
  c.seed = seed;
  return c;
}

const Arena kArena{};

}  // namespace

TEST_CASE("zero speed stays put") {
  for (const auto model : {MobilityModel::rwp3d, MobilityModel::gauss_markov3d}) {
    const auto s = trajectory(config(model, 0, 0), kArena, 3, 100.0, 1.0);
    REQUIRE(s.size() == 101);
    for (const auto& p : s) CHECK(p.position() == s.front().position());
  }
}

TEST_CASE("samples are on the requested grid") {
  const auto s = trajectory(config(MobilityModel::rwp3d, 0, 50), kArena, 0, 10.0, 0.5);
  REQUIRE(s.size() == 21);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k].t == doctest::Approx(0.5 * k));
}

TEST_CASE("containment and speed bound") {
  for (const auto model : {MobilityModel::rwp3d, MobilityModel::gauss_markov3d}) {
    for (NodeId id = 0; id < 40; ++id) {
      const MobilityConfig cfg = config(model, 0, 50, 77);
      const auto s = trajectory(cfg, kArena, id, 500.0, 0.25);
      for (std::size_t k = 0; k < s.size(); ++k) {
        REQUIRE(kArena.contains(s[k].position()));
        if (k == 0) continue;
        const double v = distance(s[k].position(), s[k - 1].position()) / (s[k].t - s[k - 1].t);
        REQUIRE(v <= cfg.speed_max * (1.0 + 1e-6));
      }
    }
  }
}

TEST_CASE("random waypoint legs respect the speed range") {
  const MobilityConfig cfg = config(MobilityModel::rwp3d, 5, 20, 12);
  for (NodeId id = 0; id < 20; ++id) {
    const Trajectory path = generate_path(cfg, kArena, id, 0.0, 500.0);
    const auto& k = path.knots();
    REQUIRE(k.size() >= 2);
    for (std::size_t i = 1; i < k.size(); ++i) {
      const double v = distance(k[i].position(), k[i - 1].position()) / (k[i].t - k[i - 1].t);
      CHECK(v >= 5.0 - 1e-9);
      CHECK(v <= 20.0 + 1e-9);
    }
    CHECK(k.back().t >= 500.0);
  }
}

TEST_CASE("pause inserts a hold at every waypoint") {
  MobilityConfig cfg = config(MobilityModel::rwp3d, 10, 10, 2);
  cfg.pause = 3.0;
  const auto& k = generate_path(cfg, kArena, 0, 0.0, 400.0).knots();
  REQUIRE(k.size() >= 3);
  for (std::size_t i = 2; i < k.size(); i += 2) {
    CHECK(k[i].position() == k[i - 1].position());
    CHECK(k[i].t - k[i - 1].t == doctest::Approx(3.0));
  }
}

TEST_CASE("full memory Gauss-Markov keeps its speed") {
  MobilityConfig cfg = config(MobilityModel::gauss_markov3d, 0, 50, 6);
  cfg.gm_alpha = 1.0;
  for (NodeId id = 0; id < 10; ++id) {
    const auto& k = generate_path(cfg, kArena, id, 0.0, 300.0).knots();
    std::size_t straight = 0;
    for (std::size_t i = 1; i < k.size(); ++i) {
      const double v = distance(k[i].position(), k[i - 1].position()) / (k[i].t - k[i - 1].t);
      CHECK(v == doctest::Approx(25.0).epsilon(1e-9));
      // Between walls the heading is fixed: consecutive legs are parallel.
      if (i + 1 < k.size()) {
        const Vec3 a = k[i].position() - k[i - 1].position();
        const Vec3 b = k[i + 1].position() - k[i].position();
        const double cosang = (a.x * b.x + a.y * b.y + a.z * b.z) / (norm(a) * norm(b));
        if (cosang > 1.0 - 1e-9) ++straight;
      }
    }
    CHECK(straight > 0);
  }
}

TEST_CASE("Gauss-Markov pitch stays shallow") {
  const MobilityConfig cfg = config(MobilityModel::gauss_markov3d, 0, 50, 8);
  for (NodeId id = 0; id < 10; ++id) {
    const auto& k = generate_path(cfg, kArena, id, 0.0, 300.0).knots();
    for (std::size_t i = 1; i < k.size(); ++i) {
      const Vec3 d = k[i].position() - k[i - 1].position();
      const double n = norm(d);
      if (n < 1e-9) continue;
      CHECK(std::abs(d.z) / n <= std::sin(std::numbers::pi / 6.0) + 1e-9);
    }
  }
}

TEST_CASE("determinism and per-node independence") {
  for (const auto model : {MobilityModel::rwp3d, MobilityModel::gauss_markov3d}) {
    const MobilityConfig cfg = config(model, 0, 50, 31);
    const auto a = trajectory(cfg, kArena, 5, 200.0, 1.0);
    const auto b = trajectory(cfg, kArena, 5, 200.0, 1.0);
    CHECK(a == b);
    CHECK(a != trajectory(cfg, kArena, 6, 200.0, 1.0));
    CHECK(a != trajectory(config(model, 0, 50, 32), kArena, 5, 200.0, 1.0));
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config(MobilityModel::rwp3d, 10, 5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(MobilityModel::rwp3d, -1, 5).validate(), std::invalid_argument);
  MobilityConfig c = config(MobilityModel::gauss_markov3d, 0, 5);
  c.gm_alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_mobility_model("gauss_markov3d") == MobilityModel::gauss_markov3d);
  CHECK(to_string(MobilityModel::rwp3d) == "rwp3d");
  CHECK_THROWS_AS(parse_mobility_model("levy"), std::invalid_argument);
}

TEST_CASE("trajectory interpolation and clamping") {
  const Trajectory t({{0, 0, 0, 0}, {10, 100, 0, 0}, {20, 100, 50, 0}});
  CHECK(t.position_at(-5) == Vec3{0, 0, 0});
  CHECK(t.position_at(5).x == doctest::Approx(50));
  CHECK(t.position_at(15).y == doctest::Approx(25));
  CHECK(t.position_at(99) == Vec3{100, 50, 0});
  CHECK_THROWS_AS(Trajectory({{1, 0, 0, 0}, {1, 1, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory(std::vector<PositionSample>{}), std::invalid_argument);
}

TEST_CASE("trace round trip") {
  std::map<NodeId, Trajectory> paths;
  const MobilityConfig cfg = config(MobilityModel::gauss_markov3d, 0, 50, 13);
  for (NodeId id : {0u, 4u, 9u}) paths.emplace(id, generate_path(cfg, kArena, id, -2.0, 60.0));
  std::stringstream io;
  write_trace(io, paths);
  const auto back = read_trace(io);
  REQUIRE(back.size() == paths.size());
  for (const auto& [id, p] : paths) CHECK(back.at(id).knots() == p.knots());

  std::istringstream shuffled("# comment\ntime node x y z\n2 1 2 0 0\n0 1 0 0 0\n\n1 1 1 0 0\n");
  const auto s = read_trace(shuffled);
  CHECK(s.at(1).knots().size() == 3);
  CHECK(s.at(1).position_at(1.5).x == doctest::Approx(1.5));

  std::istringstream bad_cols("time node x y z\n0 1 0 0\n");
  CHECK_THROWS_AS(read_trace(bad_cols), std::runtime_error);
  std::istringstream dup_time("0 1 0 0 0\n0 1 1 0 0\n");
  CHECK_THROWS_AS(read_trace(dup_time), std::runtime_error);
  std::istringstream neg_node("0 -1 0 0 0\n");
  CHECK_THROWS_AS(read_trace(neg_node), std::runtime_error);
}

TEST_CASE("exact range exit against dense sampling") {
  const MobilityConfig cfg = config(MobilityModel::rwp3d, 0, 50, 21);
  int exits = 0;
  for (NodeId id = 0; id < 60; id += 2) {
    const Trajectory a = generate_path(cfg, kArena, id, 0.0, 200.0);
    const Trajectory b = generate_path(cfg, kArena, id + 1, 0.0, 200.0);
    const double range = 400.0;
    if (distance(a.position_at(0), b.position_at(0)) > range) continue;
    const auto exit = exact_range_exit(a, b, 0.0, 200.0, range);
    // First 1 ms sample beyond range.
    std::optional<double> seen;
    for (long k = 1; k <= 200000; ++k) {
      const double t = k * 1e-3;
      if (distance(a.position_at(t), b.position_at(t)) > range) {
        seen = t;
        break;
      }
    }
    REQUIRE(exit.has_value() == seen.has_value());
    if (exit) {
      ++exits;
      CHECK(*exit <= *seen + 1e-9);
      CHECK(*exit >= *seen - 1e-3 - 1e-9);
    }
  }
  CHECK(exits > 3);

  const Trajectory still({{0, 0, 0, 0}});
  const Trajectory mover({{0, 10, 0, 0}, {10, 110, 0, 0}});
  CHECK(*exact_range_exit(still, mover, 0.0, 10.0, 50.0) == doctest::Approx(4.0));
  CHECK_FALSE(exact_range_exit(still, mover, 0.0, 10.0, 500.0));
}
