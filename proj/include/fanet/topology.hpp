#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fanet/kinematics.hpp"

namespace fanet {

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  double lifetime = 0.0;  // seconds
};

// Immutable connectivity snapshot. Nodes are kept in ascending id order and
// addressed internally by their dense index; every adjacency list is sorted by
// neighbor index, so iteration order is ascending node id.
class ConnectivityGraph {
 public:
  struct Arc {
    std::size_t head = 0;  // dense index of the neighbor
    std::size_t edge = 0;  // index into edges()
  };

  ConnectivityGraph() = default;

  // Throws std::invalid_argument on duplicate node ids, unknown endpoints,
  // self loops, duplicate edges, or non-positive lifetimes.
  ConnectivityGraph(std::vector<NodeId> nodes, std::vector<Edge> edges);

  // Adds both directions of every given edge.
  static ConnectivityGraph undirected(std::vector<NodeId> nodes, const std::vector<Edge>& edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const NodeId> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }

  std::optional<std::size_t> index_of(NodeId id) const;
  std::size_t checked_index(NodeId id) const;  // throws std::out_of_range
  NodeId id_at(std::size_t index) const { return nodes_[index]; }
  bool contains(NodeId id) const { return index_of(id).has_value(); }

  std::span<const Arc> arcs(std::size_t index) const;
  std::optional<std::size_t> find_edge(NodeId from, NodeId to) const;

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
};

struct GraphBuildParams {
  double range = 300.0;     // meters
  double tau_cutoff = 1.0;  // seconds; links with lifetime <= cutoff are dropped
  RootSearch search{};      // horizon is tau_max
};

// Edge (i,j) exists iff the pair is currently within range and its predicted
// lifetime exceeds the cutoff. Both directions carry the same lifetime.
ConnectivityGraph build_graph(std::span<const NodeState> states, const GraphBuildParams& params);

// Every currently in-range pair, both directions, with no lifetime filtering.
// Edge lifetimes are +infinity (not predicted).
ConnectivityGraph range_graph(std::span<const NodeId> ids, std::span<const Vec3> positions,
                              double range);

// Throws std::out_of_range for an unknown id.
std::vector<NodeId> neighbors(const ConnectivityGraph& g, NodeId id);

}  // namespace fanet
