#pragma once

#include <array>
#include <cstdint>
#include <functional>

namespace fanet {

using NodeId = std::uint32_t;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(Vec3, Vec3) = default;
};

double norm(Vec3 v);
double distance(Vec3 a, Vec3 b);

// One position report of a node.
struct PositionSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const PositionSample&, const PositionSample&) = default;
};

using SampleTriple = std::array<PositionSample, 3>;

// Motion state the controller derives from a node's last three reports.
// Direction is fixed by the most recent displacement (samples[1] -> samples[2]).
struct NodeState {
  NodeId node_id = 0;
  SampleTriple samples{};
  double azimuth = 0.0;       // (-pi, pi]
  double polar = 0.0;         // [0, pi]
  double speed = 0.0;         // m/s at samples[2].t
  double acceleration = 0.0;  // m/s^2

  Vec3 position() const { return samples[2].position(); }
  Vec3 direction() const;
};

struct LifetimeEstimate {
  NodeId from = 0;
  NodeId to = 0;
  double lifetime = 0.0;
  // False when the pair never left range before the horizon and lifetime is
  // the horizon cap.
  bool converged = false;
};

// Tuning for the range-exit root search.
struct RootSearch {
  double horizon = 500.0;   // tau_max, seconds
  double tolerance = 1e-3;  // bisection bracket width, seconds
  double scan_step = 1.0;   // bracketing step, seconds
};

double traversed_distance(const PositionSample& a, const PositionSample& b);

// Throws std::invalid_argument unless s0.t < s1.t < s2.t and all values are finite.
NodeState derive_state(NodeId node_id, const PositionSample& s0, const PositionSample& s1,
                       const PositionSample& s2);

// Constant-acceleration extrapolation along the state's fixed direction.
// Throws std::invalid_argument for negative dt.
Vec3 predict_position(const NodeState& state, double dt);

// First dt in (0, horizon] where separation(dt) exceeds range. separation(0)
// must be <= range. The separation is scanned in scan_step increments and the
// first bracket that leaves range is bisected down to tolerance.
// Returns {horizon, converged=false} when no exit is seen.
std::pair<double, bool> first_range_exit(const std::function<double(double)>& separation,
                                         double range, const RootSearch& search);

// Predicted time until i and j leave each other's range. Throws
// std::invalid_argument if the pair is already out of range or the parameters
// are not positive.
LifetimeEstimate link_lifetime(const NodeState& si, const NodeState& sj, double range,
                               const RootSearch& search);

// Quadratic through three samples (Newton divided differences), per axis.
class NewtonExtrapolator {
 public:
  explicit NewtonExtrapolator(const SampleTriple& samples);
  Vec3 at(double t) const;
  double last_time() const { return t_[2]; }

 private:
  std::array<double, 3> t_{};
  std::array<Vec3, 3> coef_{};
};

// Baseline lifetime predictor: extrapolates both nodes with NewtonExtrapolator
// and runs the same range-exit search from the later of the two last report times.
LifetimeEstimate extrapolation_lifetime(NodeId i, const SampleTriple& samples_i, NodeId j,
                                        const SampleTriple& samples_j, double range,
                                        const RootSearch& search);

}  // namespace fanet
