#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "fanet/kinematics.hpp"

namespace fanet {

struct Arena {
  double x_max = 2000.0;
  double y_max = 300.0;
  double z_max = 50.0;

  bool contains(Vec3 p) const {
    return p.x >= 0.0 && p.x <= x_max && p.y >= 0.0 && p.y <= y_max && p.z >= 0.0 && p.z <= z_max;
  }
};

enum class MobilityModel { rwp3d, gauss_markov3d };

std::string_view to_string(MobilityModel model);
MobilityModel parse_mobility_model(std::string_view text);  // throws std::invalid_argument

struct MobilityConfig {
  MobilityModel model = MobilityModel::rwp3d;
  double speed_min = 0.0;  // m/s
  double speed_max = 50.0;
  double pause = 0.0;        // seconds, RWP only
  double gm_alpha = 0.85;    // Gauss-Markov memory
  double gm_update = 1.0;    // seconds between Gauss-Markov updates
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// Piecewise-linear motion: position is interpolated between consecutive knots
// and held constant outside the knot range.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<PositionSample> knots);  // sorted by strictly increasing t

  Vec3 position_at(double t) const;
  std::vector<PositionSample> sample(double t_begin, double t_end, double dt) const;
  const std::vector<PositionSample>& knots() const { return knots_; }

 private:
  std::vector<PositionSample> knots_;
};

// Deterministic per (cfg.seed, node_id); covers [t_begin, t_end].
Trajectory generate_path(const MobilityConfig& cfg, const Arena& arena, NodeId node_id,
                         double t_begin, double t_end);

// Samples at t = 0, dt, 2dt, ... up to duration inclusive.
std::vector<PositionSample> trajectory(const MobilityConfig& cfg, const Arena& arena,
                                       NodeId node_id, double duration, double sample_dt);

// Plain-text trace table: a "time node x y z" header, then one whitespace
// separated row per knot. Rows may be in any order.
void write_trace(std::ostream& out, const std::map<NodeId, Trajectory>& paths);
std::map<NodeId, Trajectory> read_trace(std::istream& in);  // throws std::runtime_error

// First time in (t_now, t_end] at which |a(t) - b(t)| > range, computed exactly
// on the piecewise-linear trajectories, or nullopt if the pair stays in range.
std::optional<double> exact_range_exit(const Trajectory& a, const Trajectory& b, double t_now,
                                       double t_end, double range);

}  // namespace fanet
