#include "fanet/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fanet {

double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

double distance(Vec3 a, Vec3 b) { return norm(a - b); }

Vec3 NodeState::direction() const {
  const double s = std::sin(polar);
  return {s * std::cos(azimuth), s * std::sin(azimuth), std::cos(polar)};
}

double traversed_distance(const PositionSample& a, const PositionSample& b) {
  return distance(a.position(), b.position());
}

namespace {

bool finite_sample(const PositionSample& s) {
  return std::isfinite(s.t) && std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z);
}

}  // namespace

NodeState derive_state(NodeId node_id, const PositionSample& s0, const PositionSample& s1,
                       const PositionSample& s2) {
  if (!finite_sample(s0) || !finite_sample(s1) || !finite_sample(s2)) {
    throw std::invalid_argument("derive_state: non-finite sample for node " +
                                std::to_string(node_id));
  }
  if (!(s0.t < s1.t && s1.t < s2.t)) {
    throw std::invalid_argument("derive_state: sample times must be strictly increasing for node " +
                                std::to_string(node_id));
  }

  NodeState state;
  state.node_id = node_id;
  state.samples = {s0, s1, s2};

  const Vec3 step = s2.position() - s1.position();
  const double horizontal = std::hypot(step.x, step.y);
  const double d12 = norm(step);
  if (d12 == 0.0) {
    // Hovering: direction is arbitrary and the node is held in place.
    state.azimuth = 0.0;
    state.polar = std::numbers::pi / 2.0;
    state.speed = 0.0;
    state.acceleration = 0.0;
    return state;
  }

  state.azimuth = std::atan2(step.y, step.x);
  if (state.azimuth == -std::numbers::pi) state.azimuth = std::numbers::pi;
  state.polar = std::atan2(horizontal, step.z);

  const double v1 = traversed_distance(s0, s1) / (s1.t - s0.t);
  const double v2 = d12 / (s2.t - s1.t);
  state.speed = v2;
  state.acceleration = (v2 - v1) / (s2.t - s0.t);
  return state;
}

Vec3 predict_position(const NodeState& state, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("predict_position: dt must be >= 0");
  const Vec3 origin = state.position();
  if (dt == 0.0) return origin;
  const double travelled = state.speed * dt + 0.5 * state.acceleration * dt * dt;
  return origin + travelled * state.direction();
}

std::pair<double, bool> first_range_exit(const std::function<double(double)>& separation,
                                         double range, const RootSearch& search) {
  double lo = 0.0;
  for (long k = 1;; ++k) {
    const double hi = std::min(static_cast<double>(k) * search.scan_step, search.horizon);
    if (separation(hi) > range) {
      double a = lo;
      double b = hi;
      while (b - a > search.tolerance) {
        const double mid = 0.5 * (a + b);
        if (separation(mid) > range) {
          b = mid;
        } else {
          a = mid;
        }
      }
      return {0.5 * (a + b), true};
    }
    if (hi >= search.horizon) break;
    lo = hi;
  }
  return {search.horizon, false};
}

namespace {

void check_search(double range, const RootSearch& search) {
  if (!(range > 0.0)) throw std::invalid_argument("lifetime: range must be > 0");
  if (!(search.tolerance > 0.0)) throw std::invalid_argument("lifetime: tolerance must be > 0");
  if (!(search.scan_step > 0.0)) throw std::invalid_argument("lifetime: scan step must be > 0");
  if (!(search.horizon > 0.0)) throw std::invalid_argument("lifetime: horizon must be > 0");
}

}  // namespace

LifetimeEstimate link_lifetime(const NodeState& si, const NodeState& sj, double range,
                               const RootSearch& search) {
  check_search(range, search);
  if (distance(si.position(), sj.position()) > range) {
    throw std::invalid_argument("link_lifetime: nodes " + std::to_string(si.node_id) + " and " +
                                std::to_string(sj.node_id) + " are not in range");
  }
  LifetimeEstimate out{si.node_id, sj.node_id, search.horizon, false};
  if (si.speed == 0.0 && sj.speed == 0.0 && si.acceleration == 0.0 && sj.acceleration == 0.0) {
    return out;
  }

  const Vec3 pi = si.position();
  const Vec3 pj = sj.position();
  const Vec3 di = si.direction();
  const Vec3 dj = sj.direction();
  auto separation = [&](double dt) {
    const double ri = si.speed * dt + 0.5 * si.acceleration * dt * dt;
    const double rj = sj.speed * dt + 0.5 * sj.acceleration * dt * dt;
    return distance(pi + ri * di, pj + rj * dj);
  };
  const auto [tau, converged] = first_range_exit(separation, range, search);
  out.lifetime = tau;
  out.converged = converged;
  return out;
}

NewtonExtrapolator::NewtonExtrapolator(const SampleTriple& s) {
  if (!(s[0].t < s[1].t && s[1].t < s[2].t)) {
    throw std::invalid_argument("NewtonExtrapolator: sample times must be strictly increasing");
  }
  t_ = {s[0].t, s[1].t, s[2].t};
  const Vec3 p0 = s[0].position();
  const Vec3 p1 = s[1].position();
  const Vec3 p2 = s[2].position();
  const Vec3 d01 = (1.0 / (t_[1] - t_[0])) * (p1 - p0);
  const Vec3 d12 = (1.0 / (t_[2] - t_[1])) * (p2 - p1);
  const Vec3 d012 = (1.0 / (t_[2] - t_[0])) * (d12 - d01);
  coef_ = {p0, d01, d012};
}

Vec3 NewtonExtrapolator::at(double t) const {
  const double u = t - t_[0];
  const double w = u * (t - t_[1]);
  return coef_[0] + u * coef_[1] + w * coef_[2];
}

LifetimeEstimate extrapolation_lifetime(NodeId i, const SampleTriple& samples_i, NodeId j,
                                        const SampleTriple& samples_j, double range,
                                        const RootSearch& search) {
  check_search(range, search);
  const NewtonExtrapolator fi(samples_i);
  const NewtonExtrapolator fj(samples_j);
  const double now = std::max(fi.last_time(), fj.last_time());
  if (distance(fi.at(now), fj.at(now)) > range) {
    throw std::invalid_argument("extrapolation_lifetime: nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " are not in range");
  }
  auto separation = [&](double dt) { return distance(fi.at(now + dt), fj.at(now + dt)); };
  const auto [tau, converged] = first_range_exit(separation, range, search);
  return {i, j, tau, converged};
}

}  // namespace fanet
