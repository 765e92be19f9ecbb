#include "fanet/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "fanet/random.hpp"

namespace fanet {

std::string_view to_string(RouterFamily family) {
  switch (family) {
    case RouterFamily::lb_opar: return "lb_opar";
    case RouterFamily::opar: return "opar";
    case RouterFamily::reactive_hop: return "reactive_hop";
    case RouterFamily::proactive_hop: return "proactive_hop";
  }
  return "unknown";
}

RouterFamily parse_router_family(std::string_view text) {
  for (const auto f : {RouterFamily::lb_opar, RouterFamily::opar, RouterFamily::reactive_hop,
                       RouterFamily::proactive_hop}) {
    if (text == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown router '" + std::string(text) + "'");
}

std::string RouterKind::name() const { return std::string(to_string(family)); }

Weights table_weights(std::size_t flow_count) {
  // Best (w1, w2, w3) per number of concurrent flows, 1 through 10.
  static constexpr std::array<std::array<double, 3>, 10> kTable{{
      {0.3, 0.7, 0.0},
      {0.3, 0.7, 0.0},
      {0.3, 0.7, 0.0},
      {0.2, 0.7, 0.1},
      {0.5, 0.5, 0.0},
      {0.4, 0.3, 0.3},
      {0.4, 0.2, 0.4},
      {0.15, 0.15, 0.7},
      {0.2, 0.2, 0.6},
      {0.15, 0.15, 0.7},
  }};
  const std::size_t row = std::clamp<std::size_t>(flow_count, 1, kTable.size()) - 1;
  return Weights(kTable[row][0], kTable[row][1], kTable[row][2]);
}

Weights effective_weights(const RouterKind& kind, std::size_t flow_count) {
  switch (kind.family) {
    case RouterFamily::lb_opar:
      return kind.weights ? *kind.weights : table_weights(flow_count);
    case RouterFamily::opar: {
      const Weights w = kind.weights ? *kind.weights : table_weights(flow_count);
      const double rest = w.length() + w.lifetime();
      if (rest <= 0.0) return Weights(0.5, 0.5, 0.0);
      const double length = w.length() / rest;
      return Weights(length, 1.0 - length, 0.0);
    }
    case RouterFamily::reactive_hop:
    case RouterFamily::proactive_hop:
      break;
  }
  return Weights(1.0, 0.0, 0.0);
}

std::optional<Route> route_request(const RouterKind& kind, const Weights& w,
                                   const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                                   NodeId dst) {
  switch (kind.family) {
    case RouterFamily::lb_opar:
    case RouterFamily::opar:
      return solve(g, loads, src, dst, w, kind.objective);
    case RouterFamily::reactive_hop:
    case RouterFamily::proactive_hop:
      break;
  }
  if (src == dst) throw std::invalid_argument("route request with src == dst");
  const auto path = bfs_shortest_path(g, src, dst);
  if (!path) return std::nullopt;
  return evaluate(*path, g, loads, w);
}

std::vector<RouterKind> default_routers() {
  std::vector<RouterKind> out(4);
  out[0].family = RouterFamily::lb_opar;
  out[1].family = RouterFamily::opar;
  out[2].family = RouterFamily::reactive_hop;
  out[3].family = RouterFamily::proactive_hop;
  return out;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(arena.x_max > 0.0 && arena.y_max > 0.0 && arena.z_max > 0.0, "arena",
          "dimensions must be positive");
  require(node_count >= 2, "nodes", "need at least two nodes");
  try {
    mobility.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("mobility: ") + e.what());
  }
  require(std::isfinite(range) && range > 0.0, "range", "must be > 0");
  require(std::isfinite(channel_rate) && channel_rate > 0.0, "channel_rate", "must be > 0");
  require(std::isfinite(duration) && duration > 0.0, "duration", "must be > 0");
  require(std::isfinite(tick) && tick > 0.0, "tick", "must be > 0");
  const double ticks = duration / tick;
  require(std::abs(ticks - std::round(ticks)) <= 1e-9 * std::max(1.0, ticks), "duration",
          "must be a whole number of ticks");
  require(reroute_delay >= 0.0, "reroute_delay", "must be >= 0");
  require(tau_cutoff >= 0.0, "tau_cutoff", "must be >= 0");
  require(bisection_tol > 0.0, "bisection_tol", "must be > 0");
  require(replications >= 1, "replications", "must be >= 1");
  require(!routers.empty(), "routers", "at least one router is required");
  for (const RouterKind& r : routers) {
    require(r.family != RouterFamily::proactive_hop || r.refresh_period > 0.0, "proactive_period",
            "must be > 0");
  }
  require(prediction.warmup >= 2.0 * tick, "warmup", "must cover at least two reporting periods");
  require(prediction.observe > 0.0, "observe", "must be > 0");
  require(prediction.runs >= 1, "prediction_runs", "must be >= 1");

  if (flows.empty()) {
    require(flow_rule.count >= 1, "flows", "need at least one flow");
    require(flow_rule.file_size > 0.0, "file_size", "must be > 0");
    require(flow_rule.start >= 0.0 && flow_rule.start_spread >= 0.0, "flow_start",
            "start and spread must be >= 0");
  }
  for (const FlowSpec& f : flows) {
    const std::string field = "flow_list[" + std::to_string(f.id) + "]";
    require(f.src < node_count && f.dst < node_count, field, "node id out of range");
    require(f.src != f.dst, field, "src and dst must differ");
    require(f.file_size > 0.0, field, "file size must be > 0");
    require(f.start_time >= 0.0, field, "start time must be >= 0");
  }
  if (!trace.empty()) {
    require(trace.size() == node_count, "trace_file",
            "must describe exactly " + std::to_string(node_count) + " nodes");
    for (const auto& [id, path] : trace) {
      require(id < node_count, "trace_file", "node id " + std::to_string(id) + " out of range");
    }
  }
}

std::vector<FlowSpec> make_flows(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (!cfg.flows.empty()) return cfg.flows;
  std::mt19937_64 rng(derive_seed(seed, Stream::flows, 0));
  const std::size_t n = cfg.node_count;
  const std::size_t count = cfg.flow_rule.count;
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  std::uniform_real_distribution<double> spread(0.0, cfg.flow_rule.start_spread);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<FlowSpec> out;
  for (std::size_t k = 0; k < count; ++k) {
    FlowSpec f;
    f.id = static_cast<std::uint32_t>(k);
    if (2 * count <= n) {
      f.src = ids[2 * k];
      f.dst = ids[2 * k + 1];
    } else {
      f.src = static_cast<NodeId>(pick(rng));
      do {
        f.dst = static_cast<NodeId>(pick(rng));
      } while (f.dst == f.src);
    }
    f.file_size = cfg.flow_rule.file_size;
    f.start_time = cfg.flow_rule.start + (cfg.flow_rule.start_spread > 0.0 ? spread(rng) : 0.0);
    out.push_back(f);
  }
  return out;
}

RouterMetrics summarize(std::string router, const Weights& w, std::vector<FlowRecord> flows,
                        double duration) {
  RouterMetrics m;
  m.router = std::move(router);
  m.weights = w;
  double fct_sum = 0.0;
  double fct_success_sum = 0.0;
  double throughput_sum = 0.0;
  std::size_t successes = 0;
  for (const FlowRecord& f : flows) {
    m.reroutes += f.reroutes;
    fct_sum += f.success ? f.fct : duration;
    if (f.success) {
      ++successes;
      fct_success_sum += f.fct;
      throughput_sum += f.spec.file_size * 8.0 / f.fct / 1e6;
    }
  }
  if (!flows.empty()) {
    m.success_rate = static_cast<double>(successes) / static_cast<double>(flows.size());
    m.mean_fct = fct_sum / static_cast<double>(flows.size());
  }
  if (successes > 0) {
    m.mean_throughput_mbps = throughput_sum / static_cast<double>(successes);
    m.mean_fct_success = fct_success_sum / static_cast<double>(successes);
  }
  m.weighted_throughput_mbps = m.mean_throughput_mbps * m.success_rate;
  m.flows = std::move(flows);
  return m;
}

std::vector<Trajectory> scenario_paths(const ScenarioConfig& cfg, std::uint64_t seed,
                                       double preroll, double t_end) {
  std::vector<Trajectory> paths;
  paths.reserve(cfg.node_count);
  if (!cfg.trace.empty()) {
    for (NodeId id = 0; id < cfg.node_count; ++id) {
      const auto it = cfg.trace.find(id);
      if (it == cfg.trace.end()) {
        throw std::invalid_argument("trace_file: no trajectory for node " + std::to_string(id));
      }
      paths.push_back(it->second);
    }
    return paths;
  }
  MobilityConfig mob = cfg.mobility;
  mob.seed = seed;
  for (NodeId id = 0; id < cfg.node_count; ++id) {
    paths.push_back(generate_path(mob, cfg.arena, id, -preroll, t_end));
  }
  return paths;
}

namespace {

struct FlowState {
  FlowSpec spec;
  double delivered = 0.0;
  double pending = 0.0;  // bytes sent this interval, credited if the route survives it
  std::uint32_t reroutes = 0;
  std::optional<double> completion;
  std::optional<RouteLease> lease;
  bool ever_routed = false;
  bool owes_reroute_delay = false;
  bool in_setup = false;
};

struct Lane {
  RouterKind kind;
  Weights weights;
  LoadTracker tracker;
  std::vector<FlowState> flows;
  std::optional<ConnectivityGraph> stale;
  double stale_time = 0.0;
};

bool route_intact(std::span<const NodeId> nodes, std::span<const Vec3> pos, double range) {
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (distance(pos[nodes[k]], pos[nodes[k + 1]]) > range) return false;
  }
  return true;
}

bool uses_lifetimes(RouterFamily f) {
  return f == RouterFamily::lb_opar || f == RouterFamily::opar;
}

}  // namespace

Simulation::Simulation(ScenarioConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
  paths_ = scenario_paths(cfg_, seed_, 2.0 * cfg_.tick, cfg_.duration);
  flows_ = make_flows(cfg_, seed_);
}

Vec3 Simulation::position(NodeId id, double t) const { return paths_.at(id).position_at(t); }

MetricsReport Simulation::run() {
  const std::size_t n = cfg_.node_count;
  const double dt = cfg_.tick;
  const long ticks = std::lround(cfg_.duration / dt);

  std::vector<Lane> lanes;
  for (const RouterKind& kind : cfg_.routers) {
    Lane lane{kind, effective_weights(kind, flows_.size()), {}, {}, std::nullopt, 0.0};
    for (const FlowSpec& f : flows_) {
      FlowState state;
      state.spec = f;
      lane.flows.push_back(std::move(state));
    }
    lanes.push_back(std::move(lane));
  }

  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::vector<Vec3> pos(n);
  std::vector<FlowProgress> progress;

  auto notify = [&](double t, std::size_t lane_index, bool final) {
    if (!observer_) return;
    const Lane& lane = lanes[lane_index];
    progress.clear();
    for (const FlowState& f : lane.flows) {
      FlowProgress p{f.spec.id, f.delivered, {}, false};
      if (f.lease) {
        p.route = f.lease->nodes;
        p.transmitting = !f.in_setup && f.pending > 0.0;
      }
      progress.push_back(std::move(p));
    }
    observer_(TickView{t, lane_index, pos, progress, &lane.tracker, final});
  };

  for (long k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (NodeId id = 0; id < n; ++id) pos[id] = paths_[id].position_at(t);

    // Settle the interval that just ended.
    for (Lane& lane : lanes) {
      for (FlowState& f : lane.flows) {
        if (!f.lease) continue;
        if (route_intact(f.lease->nodes, pos, cfg_.range)) {
          f.delivered += f.pending;
          f.pending = 0.0;
          if (f.delivered >= f.spec.file_size * (1.0 - 1e-12)) {
            f.delivered = f.spec.file_size;
            f.completion = t;
            lane.tracker.teardown(*f.lease);
            f.lease.reset();
          }
        } else {
          f.pending = 0.0;
          lane.tracker.teardown(*f.lease);
          f.lease.reset();
          ++f.reroutes;
          f.owes_reroute_delay = true;
        }
      }
    }
    if (k == ticks) break;

    // Snapshots are built lazily; most ticks need none for most lanes.
    std::optional<ConnectivityGraph> current_range;
    std::optional<ConnectivityGraph> current_lifetime;
    auto range_snapshot = [&]() -> const ConnectivityGraph& {
      if (!current_range) current_range = range_graph(ids, pos, cfg_.range);
      return *current_range;
    };
    auto lifetime_snapshot = [&]() -> const ConnectivityGraph& {
      if (!current_lifetime) {
        std::vector<NodeState> states;
        states.reserve(n);
        for (NodeId id = 0; id < n; ++id) {
          const Trajectory& p = paths_[id];
          const Vec3 a = p.position_at(t - 2.0 * dt);
          const Vec3 b = p.position_at(t - dt);
          states.push_back(derive_state(id, {t - 2.0 * dt, a.x, a.y, a.z},
                                        {t - dt, b.x, b.y, b.z}, {t, pos[id].x, pos[id].y, pos[id].z}));
        }
        GraphBuildParams params;
        params.range = cfg_.range;
        params.tau_cutoff = cfg_.tau_cutoff;
        params.search.tolerance = cfg_.bisection_tol;
        params.search.horizon = std::max(cfg_.duration - t, cfg_.tau_cutoff + dt);
        current_lifetime = build_graph(states, params);
      }
      return *current_lifetime;
    };

    for (Lane& lane : lanes) {
      if (lane.kind.family == RouterFamily::proactive_hop &&
          (!lane.stale || t - lane.stale_time >= lane.kind.refresh_period - 1e-9)) {
        lane.stale = range_snapshot();
        lane.stale_time = t;
      }
      for (FlowState& f : lane.flows) {
        if (f.completion || f.lease || f.spec.start_time > t + 1e-9) continue;
        const ConnectivityGraph& view = uses_lifetimes(lane.kind.family) ? lifetime_snapshot()
                                        : lane.kind.family == RouterFamily::proactive_hop
                                            ? *lane.stale
                                            : range_snapshot();
        const auto route = route_request(lane.kind, lane.weights, view, lane.tracker.loads(),
                                         f.spec.src, f.spec.dst);
        // A stale table can hand out a route that no longer exists.
        if (!route || !route_intact(route->nodes, pos, cfg_.range)) continue;
        f.lease = lane.tracker.install(route->nodes, range_snapshot());
        if (!f.ever_routed) {
          f.ever_routed = true;
          f.in_setup = true;
        }
      }
    }

    // Schedule the coming interval.
    for (std::size_t li = 0; li < lanes.size(); ++li) {
      Lane& lane = lanes[li];
      for (FlowState& f : lane.flows) {
        if (!f.lease) continue;
        if (f.in_setup) {
          f.in_setup = false;
          f.pending = 0.0;
          continue;
        }
        const auto& nodes = f.lease->nodes;
        std::uint32_t contention = 1;
        for (std::size_t h = 0; h + 1 < nodes.size(); ++h) {
          contention = std::max(contention, lane.tracker.loads().at(nodes[h]));
        }
        double airtime = dt;
        if (f.owes_reroute_delay) {
          airtime = std::max(0.0, dt - cfg_.reroute_delay);
          f.owes_reroute_delay = false;
        }
        const double sendable = cfg_.channel_rate / contention * airtime / 8.0;
        f.pending = std::min(f.spec.file_size - f.delivered, sendable);
      }
      notify(t, li, false);
    }
  }

  MetricsReport report;
  report.seed = seed_;
  for (std::size_t li = 0; li < lanes.size(); ++li) {
    Lane& lane = lanes[li];
    std::vector<FlowRecord> records;
    for (FlowState& f : lane.flows) {
      if (f.lease) {
        lane.tracker.teardown(*f.lease);
        f.lease.reset();
      }
      f.pending = 0.0;
      FlowRecord r;
      r.spec = f.spec;
      r.bytes_delivered = f.delivered;
      r.reroutes = f.reroutes;
      r.completion_time = f.completion;
      r.success = f.completion.has_value();
      r.fct = r.success ? *f.completion - f.spec.start_time : cfg_.duration;
      records.push_back(r);
    }
    notify(cfg_.duration, li, true);
    report.routers.push_back(summarize(lane.kind.name(), lane.weights, std::move(records),
                                       cfg_.duration));
  }
  return report;
}

MetricsReport run(const ScenarioConfig& cfg, std::uint64_t seed) {
  return Simulation(cfg, seed).run();
}

ErrorStats error_stats(std::span<const double> errors) {
  ErrorStats s;
  s.count = errors.size();
  if (errors.empty()) return s;
  double sum = 0.0;
  for (const double e : errors) sum += e;
  s.mean = sum / static_cast<double>(errors.size());
  double sq = 0.0;
  for (const double e : errors) sq += (e - s.mean) * (e - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(errors.size()));
  return s;
}

PredictionRun evaluate_prediction(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const double now = cfg.prediction.warmup;
  const double window = cfg.prediction.observe;
  const double dt = cfg.tick;
  const auto paths = scenario_paths(cfg, seed, 0.0, now + window);

  std::vector<SampleTriple> reports;
  std::vector<NodeState> states;
  for (NodeId id = 0; id < cfg.node_count; ++id) {
    SampleTriple tri;
    for (int k = 0; k < 3; ++k) {
      const double ts = now - static_cast<double>(2 - k) * dt;
      const Vec3 p = paths[id].position_at(ts);
      tri[static_cast<std::size_t>(k)] = {ts, p.x, p.y, p.z};
    }
    reports.push_back(tri);
    states.push_back(derive_state(id, tri[0], tri[1], tri[2]));
  }

  RootSearch search;
  search.horizon = window;
  search.tolerance = cfg.bisection_tol;

  PredictionRun out;
  out.seed = seed;
  std::vector<double> kin_err;
  std::vector<double> ext_err;
  for (NodeId i = 0; i < cfg.node_count; ++i) {
    for (NodeId j = i + 1; j < cfg.node_count; ++j) {
      if (distance(states[i].position(), states[j].position()) > cfg.range) continue;
      LinkPredictionSample s;
      s.a = i;
      s.b = j;
      s.kinematic = std::min(link_lifetime(states[i], states[j], cfg.range, search).lifetime, window);
      s.extrapolation = std::min(
          extrapolation_lifetime(i, reports[i], j, reports[j], cfg.range, search).lifetime, window);
      const auto exit = exact_range_exit(paths[i], paths[j], now, now + window, cfg.range);
      s.observed = exit ? std::min(*exit - now, window) : window;
      kin_err.push_back(std::abs(s.kinematic - s.observed));
      ext_err.push_back(std::abs(s.extrapolation - s.observed));
      out.links.push_back(s);
    }
  }
  out.kinematic = error_stats(kin_err);
  out.extrapolation = error_stats(ext_err);
  return out;
}

}  // namespace fanet
