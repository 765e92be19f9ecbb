#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fanet/load_tracker.hpp"
#include "fanet/mobility.hpp"
#include "fanet/router.hpp"
#include "fanet/topology.hpp"

namespace fanet {

enum class RouterFamily { lb_opar, opar, reactive_hop, proactive_hop };

std::string_view to_string(RouterFamily family);
RouterFamily parse_router_family(std::string_view text);  // throws std::invalid_argument

struct RouterKind {
  RouterFamily family = RouterFamily::lb_opar;
  // lb_opar / opar only; when absent the weight table is looked up by flow count.
  std::optional<Weights> weights;
  double refresh_period = 10.0;  // proactive_hop snapshot refresh, seconds
  Objective objective = Objective::bottleneck;

  std::string name() const;
};

// Tuned weights by number of concurrent flows (1..10, clamped).
Weights table_weights(std::size_t flow_count);

// Weights the router actually uses. opar drops the load term and rescales the
// remaining two to sum to one; the hop-count baselines report (1, 0, 0).
Weights effective_weights(const RouterKind& kind, std::size_t flow_count);

// Dispatches one route request. The caller passes the graph the router is
// allowed to see: the lifetime-filtered snapshot for lb_opar/opar, the plain
// range snapshot for reactive_hop, the last refreshed range snapshot for
// proactive_hop.
std::optional<Route> route_request(const RouterKind& kind, const Weights& w,
                                   const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                                   NodeId dst);

struct FlowSpec {
  std::uint32_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double file_size = 5e6;  // bytes
  double start_time = 0.0;
};

struct FlowRule {
  std::size_t count = 5;
  double file_size = 5e6;
  double start = 0.0;
  double start_spread = 0.0;  // starts drawn uniformly in [start, start + spread]
};

struct PredictionConfig {
  double warmup = 100.0;
  double observe = 500.0;
  std::size_t runs = 1000;
};

struct ScenarioConfig {
  Arena arena{};
  std::size_t node_count = 50;
  MobilityConfig mobility{};
  std::string trace_file;                 // informational; trace holds the parsed table
  std::map<NodeId, Trajectory> trace;     // replaces generated mobility when non-empty
  std::vector<FlowSpec> flows;            // explicit flows; flow_rule is used when empty
  FlowRule flow_rule{};
  std::vector<RouterKind> routers;
  double range = 300.0;         // meters
  double channel_rate = 11e6;   // bits per second
  double duration = 500.0;      // seconds
  double tick = 1.0;            // controller reporting period, seconds
  double reroute_delay = 0.1;   // seconds of airtime lost per reroute
  double tau_cutoff = 1.0;      // seconds
  double bisection_tol = 1e-3;  // seconds
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  PredictionConfig prediction{};

  void validate() const;  // throws std::invalid_argument naming the field
  std::size_t flow_count() const { return flows.empty() ? flow_rule.count : flows.size(); }
};

// Default router set: lb_opar, opar, reactive_hop, proactive_hop.
std::vector<RouterKind> default_routers();

std::vector<FlowSpec> make_flows(const ScenarioConfig& cfg, std::uint64_t seed);

struct FlowRecord {
  FlowSpec spec;
  double bytes_delivered = 0.0;
  std::uint32_t reroutes = 0;
  std::optional<double> completion_time;
  bool success = false;
  double fct = 0.0;  // scenario duration for failed flows
};

struct RouterMetrics {
  std::string router;
  Weights weights{1.0, 0.0, 0.0};
  double success_rate = 0.0;
  double mean_throughput_mbps = 0.0;      // successful flows only
  double weighted_throughput_mbps = 0.0;  // mean_throughput_mbps * success_rate
  double mean_fct = 0.0;                  // all flows, failures at the duration floor
  std::optional<double> mean_fct_success;
  std::uint64_t reroutes = 0;
  std::vector<FlowRecord> flows;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::vector<RouterMetrics> routers;
};

RouterMetrics summarize(std::string router, const Weights& w, std::vector<FlowRecord> flows,
                        double duration);

struct FlowProgress {
  std::uint32_t flow_id = 0;
  double bytes_delivered = 0.0;
  std::vector<NodeId> route;  // empty when the flow holds no route
  bool transmitting = false;  // route carries data during the coming interval
};

// Snapshot handed to an observer after every tick's routing and scheduling step.
struct TickView {
  double time = 0.0;
  std::size_t lane = 0;
  std::span<const Vec3> positions;  // indexed by node id
  std::span<const FlowProgress> flows;
  const LoadTracker* tracker = nullptr;
  bool final = false;  // scenario end, after every lease was released
};

class Simulation {
 public:
  Simulation(ScenarioConfig cfg, std::uint64_t seed);

  void set_observer(std::function<void(const TickView&)> observer) {
    observer_ = std::move(observer);
  }
  MetricsReport run();

  const std::vector<FlowSpec>& flows() const { return flows_; }
  Vec3 position(NodeId id, double t) const;

 private:
  ScenarioConfig cfg_;
  std::uint64_t seed_;
  std::vector<Trajectory> paths_;
  std::vector<FlowSpec> flows_;
  std::function<void(const TickView&)> observer_;
};

MetricsReport run(const ScenarioConfig& cfg, std::uint64_t seed);

// Trajectories for every node: the trace when present, otherwise generated
// from the mobility model starting `preroll` seconds before t = 0.
std::vector<Trajectory> scenario_paths(const ScenarioConfig& cfg, std::uint64_t seed,
                                       double preroll, double t_end);

struct LinkPredictionSample {
  NodeId a = 0;
  NodeId b = 0;
  double kinematic = 0.0;
  double extrapolation = 0.0;
  double observed = 0.0;
};

struct ErrorStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

ErrorStats error_stats(std::span<const double> errors);

struct PredictionRun {
  std::uint64_t seed = 0;
  std::vector<LinkPredictionSample> links;
  ErrorStats kinematic;
  ErrorStats extrapolation;
};

// Lifetime prediction harness: move for `warmup` seconds, predict every live
// link with both predictors, then observe for `observe` seconds. Lifetimes
// beyond the observation window are censored to its length.
PredictionRun evaluate_prediction(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace fanet
