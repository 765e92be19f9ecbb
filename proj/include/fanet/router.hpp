#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fanet/load_tracker.hpp"
#include "fanet/topology.hpp"

namespace fanet {

// Path length / lifetime / load weights. Each in [0,1], summing to 1 within 1e-9.
class Weights {
 public:
  Weights(double length, double lifetime, double load);  // throws std::invalid_argument

  double length() const { return w_[0]; }
  double lifetime() const { return w_[1]; }
  double load() const { return w_[2]; }

  friend bool operator==(const Weights&, const Weights&) = default;

 private:
  double w_[3];
};

enum class Objective {
  bottleneck,  // w1 * hops + max edge cost
  blp,         // w1 * hops + w2 * max(1/tau) + w3 * max load of non-destination nodes
};

std::string_view to_string(Objective objective);

// Lifetime-load cost of an edge: w2 / tau + w3 * load(head).
double edge_cost(const Edge& edge, const LoadVector& loads, const Weights& w);

struct Route {
  std::vector<NodeId> nodes;
  std::size_t hop_count = 0;
  double inverse_lifetime = 0.0;  // T: max 1/tau over path edges
  double path_load = 0.0;         // L: max load over nodes with an outgoing path edge
  double bottleneck_cost = 0.0;   // max edge_cost over path edges
  double objective_blp = 0.0;
  double objective_bottleneck = 0.0;

  double objective(Objective kind) const {
    return kind == Objective::blp ? objective_blp : objective_bottleneck;
  }
};

// Throws std::invalid_argument unless path is a simple path of >= 2 nodes in g.
Route evaluate(std::span<const NodeId> path, const ConnectivityGraph& g, const LoadVector& loads,
               const Weights& w);

// Fewest-hop path using only edges with alive[edge] != 0 (all edges when empty).
// Neighbors are expanded in ascending id order, which makes the result the
// lexicographically smallest among shortest paths. Throws std::out_of_range
// for unknown ids.
std::optional<std::vector<NodeId>> bfs_shortest_path(const ConnectivityGraph& g, NodeId src,
                                                     NodeId dst,
                                                     std::span<const std::uint8_t> alive = {});

struct SolveTrace {
  std::optional<Route> route;
  std::size_t iterations = 0;     // BFS calls that found a path
  std::vector<Route> candidates;  // every BFS path, in discovery order
};

// Iterated BFS with lifetime-load pruning: after each shortest path is found,
// every residual edge whose cost is >= that path's bottleneck cost is removed,
// until src and dst disconnect. The best candidate under `objective` wins.
// Throws std::invalid_argument for src == dst, std::out_of_range for unknown ids.
SolveTrace solve_traced(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                        NodeId dst, const Weights& w, Objective objective = Objective::bottleneck);

std::optional<Route> solve(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                           NodeId dst, const Weights& w, Objective objective = Objective::bottleneck);

inline constexpr std::size_t kOracleMaxNodes = 14;

// Exhaustive search over all simple src->dst paths. Ties prefer fewer hops, then
// the lexicographically smallest node sequence. Throws std::length_error when
// the graph has more than max_nodes nodes.
std::optional<Route> oracle_solve(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                                  NodeId dst, const Weights& w, Objective objective,
                                  std::size_t max_nodes = kOracleMaxNodes);

}  // namespace fanet
