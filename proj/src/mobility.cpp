#include "fanet/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fanet/random.hpp"

namespace fanet {

std::string_view to_string(MobilityModel model) {
  return model == MobilityModel::gauss_markov3d ? "gauss_markov3d" : "rwp3d";
}

MobilityModel parse_mobility_model(std::string_view text) {
  if (text == "rwp3d") return MobilityModel::rwp3d;
  if (text == "gauss_markov3d") return MobilityModel::gauss_markov3d;
  throw std::invalid_argument("unknown mobility model '" + std::string(text) + "'");
}

void MobilityConfig::validate() const {
  if (!(speed_min >= 0.0 && speed_min <= speed_max && std::isfinite(speed_max))) {
    throw std::invalid_argument("mobility: need 0 <= speed_min <= speed_max");
  }
  if (!(pause >= 0.0)) throw std::invalid_argument("mobility: pause must be >= 0");
  if (!(gm_alpha >= 0.0 && gm_alpha <= 1.0)) {
    throw std::invalid_argument("mobility: gm_alpha must lie in [0, 1]");
  }
  if (!(gm_update > 0.0)) throw std::invalid_argument("mobility: gm_update must be > 0");
}

Trajectory::Trajectory(std::vector<PositionSample> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("Trajectory: no knots");
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k - 1].t < knots_[k].t)) {
      throw std::invalid_argument("Trajectory: knot times must be strictly increasing");
    }
  }
}

Vec3 Trajectory::position_at(double t) const {
  if (t <= knots_.front().t) return knots_.front().position();
  if (t >= knots_.back().t) return knots_.back().position();
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const PositionSample& s) { return v < s.t; });
  const PositionSample& b = *hi;
  const PositionSample& a = *(hi - 1);
  const double u = (t - a.t) / (b.t - a.t);
  return a.position() + u * (b.position() - a.position());
}

std::vector<PositionSample> Trajectory::sample(double t_begin, double t_end, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("Trajectory::sample: dt must be > 0");
  std::vector<PositionSample> out;
  for (long k = 0;; ++k) {
    const double t = t_begin + static_cast<double>(k) * dt;
    if (t > t_end + 1e-9 * std::max(1.0, std::abs(t_end))) break;
    const Vec3 p = position_at(t);
    out.push_back({t, p.x, p.y, p.z});
  }
  return out;
}

namespace {

Vec3 uniform_point(std::mt19937_64& rng, const Arena& arena) {
  std::uniform_real_distribution<double> ux(0.0, arena.x_max);
  std::uniform_real_distribution<double> uy(0.0, arena.y_max);
  std::uniform_real_distribution<double> uz(0.0, arena.z_max);
  const double x = ux(rng);
  const double y = uy(rng);
  const double z = uz(rng);
  return {x, y, z};
}

void push_knot(std::vector<PositionSample>& knots, double t, Vec3 p) {
  if (t > knots.back().t) knots.push_back({t, p.x, p.y, p.z});
}

Trajectory random_waypoint(const MobilityConfig& cfg, const Arena& arena, std::mt19937_64& rng,
                           double t_begin, double t_end) {
  Vec3 pos = uniform_point(rng, arena);
  std::vector<PositionSample> knots{{t_begin, pos.x, pos.y, pos.z}};
  std::uniform_real_distribution<double> speed_dist(cfg.speed_min, cfg.speed_max);
  double t = t_begin;
  while (t < t_end) {
    const Vec3 target = uniform_point(rng, arena);
    const double speed = cfg.speed_max > 0.0 ? speed_dist(rng) : 0.0;
    if (speed <= 0.0) break;  // parked for good
    t += distance(pos, target) / speed;
    push_knot(knots, t, target);
    pos = target;
    if (cfg.pause > 0.0) {
      t += cfg.pause;
      push_knot(knots, t, pos);
    }
  }
  return Trajectory(std::move(knots));
}

constexpr double kMaxPitch = std::numbers::pi / 6.0;

struct GaussMarkovState {
  double speed;
  double heading;
  double pitch;
  double mean_heading;
  double mean_pitch = 0.0;

  Vec3 velocity() const {
    const double c = std::cos(pitch);
    return {speed * c * std::cos(heading), speed * c * std::sin(heading),
            speed * std::sin(pitch)};
  }
};

// Moves for `span` seconds at the current velocity, mirroring off the arena
// walls. A reflection flips the heading (or pitch) and its mean as well.
void advance_reflecting(GaussMarkovState& s, Vec3& pos, double& t, double span, const Arena& arena,
                        std::vector<PositionSample>& knots) {
  double remaining = span;
  for (int guard = 0; remaining > 0.0 && guard < 64; ++guard) {
    const Vec3 v = s.velocity();
    double hit = std::numeric_limits<double>::infinity();
    int axis = -1;
    const double p[3] = {pos.x, pos.y, pos.z};
    const double vel[3] = {v.x, v.y, v.z};
    const double hi[3] = {arena.x_max, arena.y_max, arena.z_max};
    for (int a = 0; a < 3; ++a) {
      double h = std::numeric_limits<double>::infinity();
      if (vel[a] > 0.0) h = (hi[a] - p[a]) / vel[a];
      if (vel[a] < 0.0) h = -p[a] / vel[a];
      if (h < hit) {
        hit = std::max(h, 0.0);
        axis = a;
      }
    }
    const double step = std::min(hit, remaining);
    pos = pos + step * v;
    pos = {std::clamp(pos.x, 0.0, arena.x_max), std::clamp(pos.y, 0.0, arena.y_max),
           std::clamp(pos.z, 0.0, arena.z_max)};
    t += step;
    remaining -= step;
    push_knot(knots, t, pos);
    if (hit <= step && axis >= 0) {
      if (axis == 0) {
        s.heading = std::numbers::pi - s.heading;
        s.mean_heading = std::numbers::pi - s.mean_heading;
      } else if (axis == 1) {
        s.heading = -s.heading;
        s.mean_heading = -s.mean_heading;
      } else {
        s.pitch = -s.pitch;
        s.mean_pitch = -s.mean_pitch;
      }
    }
  }
  if (remaining > 0.0) {
    // Stuck in a corner; hold position for the rest of the interval.
    t += remaining;
    push_knot(knots, t, pos);
  }
}

Trajectory gauss_markov(const MobilityConfig& cfg, const Arena& arena, std::mt19937_64& rng,
                        double t_begin, double t_end) {
  Vec3 pos = uniform_point(rng, arena);
  std::vector<PositionSample> knots{{t_begin, pos.x, pos.y, pos.z}};

  const double mean_speed = 0.5 * (cfg.speed_min + cfg.speed_max);
  const double speed_sigma = 0.25 * (cfg.speed_max - cfg.speed_min);
  const double heading_sigma = 0.4;
  const double pitch_sigma = 0.1;
  std::uniform_real_distribution<double> heading_dist(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double mean_heading = heading_dist(rng);
  GaussMarkovState s{mean_speed, mean_heading, 0.0, mean_heading};
  const double alpha = cfg.gm_alpha;
  const double keep = std::sqrt(1.0 - alpha * alpha);

  double t = t_begin;
  while (t < t_end) {
    advance_reflecting(s, pos, t, cfg.gm_update, arena, knots);
    const double n_speed = gauss(rng);
    const double n_heading = gauss(rng);
    const double n_pitch = gauss(rng);
    s.speed = alpha * s.speed + (1.0 - alpha) * mean_speed + keep * speed_sigma * n_speed;
    s.speed = std::clamp(s.speed, cfg.speed_min, cfg.speed_max);
    s.heading = alpha * s.heading + (1.0 - alpha) * s.mean_heading + keep * heading_sigma * n_heading;
    s.pitch = alpha * s.pitch + (1.0 - alpha) * s.mean_pitch + keep * pitch_sigma * n_pitch;
    s.pitch = std::clamp(s.pitch, -kMaxPitch, kMaxPitch);
  }
  return Trajectory(std::move(knots));
}

}  // namespace

Trajectory generate_path(const MobilityConfig& cfg, const Arena& arena, NodeId node_id,
                         double t_begin, double t_end) {
  cfg.validate();
  if (!(arena.x_max > 0.0 && arena.y_max > 0.0 && arena.z_max > 0.0)) {
    throw std::invalid_argument("arena dimensions must be positive");
  }
  if (!(t_end > t_begin)) throw std::invalid_argument("generate_path: empty time range");
  std::mt19937_64 rng(derive_seed(cfg.seed, Stream::mobility, node_id));
  return cfg.model == MobilityModel::rwp3d ? random_waypoint(cfg, arena, rng, t_begin, t_end)
                                           : gauss_markov(cfg, arena, rng, t_begin, t_end);
}

std::vector<PositionSample> trajectory(const MobilityConfig& cfg, const Arena& arena,
                                       NodeId node_id, double duration, double sample_dt) {
  if (!(duration > 0.0)) throw std::invalid_argument("trajectory: duration must be > 0");
  return generate_path(cfg, arena, node_id, 0.0, duration).sample(0.0, duration, sample_dt);
}

void write_trace(std::ostream& out, const std::map<NodeId, Trajectory>& paths) {
  out << "time node x y z\n";
  out.precision(17);
  for (const auto& [id, path] : paths) {
    for (const PositionSample& k : path.knots()) {
      out << k.t << ' ' << id << ' ' << k.x << ' ' << k.y << ' ' << k.z << '\n';
    }
  }
}

std::map<NodeId, Trajectory> read_trace(std::istream& in) {
  std::map<NodeId, std::vector<PositionSample>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 4, "time") == 0) continue;
    std::istringstream row(line);
    PositionSample s;
    long long node = -1;
    std::string extra;
    if (!(row >> s.t >> node >> s.x >> s.y >> s.z) || node < 0 || (row >> extra)) {
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": expected 'time node x y z'");
    }
    rows[static_cast<NodeId>(node)].push_back(s);
  }
  std::map<NodeId, Trajectory> out;
  for (auto& [id, knots] : rows) {
    std::sort(knots.begin(), knots.end(),
              [](const PositionSample& a, const PositionSample& b) { return a.t < b.t; });
    try {
      out.emplace(id, Trajectory(std::move(knots)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trace node " + std::to_string(id) + ": " + e.what());
    }
  }
  return out;
}

std::optional<double> exact_range_exit(const Trajectory& a, const Trajectory& b, double t_now,
                                       double t_end, double range) {
  std::vector<double> cuts{t_now, t_end};
  for (const auto* path : {&a, &b}) {
    for (const PositionSample& k : path->knots()) {
      if (k.t > t_now && k.t < t_end) cuts.push_back(k.t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double r2 = range * range;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k];
    const double t1 = cuts[k + 1];
    const Vec3 r0 = a.position_at(t0) - b.position_at(t0);
    const Vec3 r1 = a.position_at(t1) - b.position_at(t1);
    const double c = r0.x * r0.x + r0.y * r0.y + r0.z * r0.z - r2;
    if (c > 0.0) return t0;
    const Vec3 v = (1.0 / (t1 - t0)) * (r1 - r0);
    const double qa = v.x * v.x + v.y * v.y + v.z * v.z;
    if (qa == 0.0) continue;
    const double qb = 2.0 * (r0.x * v.x + r0.y * v.y + r0.z * v.z);
    const double disc = std::max(qb * qb - 4.0 * qa * c, 0.0);
    // Larger root; c <= 0 keeps it >= 0. Citardauq form avoids cancellation.
    const double root = qb <= 0.0 ? (-qb + std::sqrt(disc)) / (2.0 * qa)
                                  : (-2.0 * c) / (qb + std::sqrt(disc));
    if (root < t1 - t0) return t0 + root;
  }
  const Vec3 end = a.position_at(t_end) - b.position_at(t_end);
  if (norm(end) > range) return t_end;
  return std::nullopt;
}

}  // namespace fanet
