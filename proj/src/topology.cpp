#include "fanet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fanet {

ConnectivityGraph::ConnectivityGraph(std::vector<NodeId> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw std::invalid_argument("ConnectivityGraph: duplicate node id");
  }

  std::vector<std::size_t> degree(nodes_.size(), 0);
  for (const Edge& e : edges_) {
    if (e.from == e.to) {
      throw std::invalid_argument("ConnectivityGraph: self loop at node " + std::to_string(e.from));
    }
    if (!(e.lifetime > 0.0) || std::isnan(e.lifetime)) {
      throw std::invalid_argument("ConnectivityGraph: edge lifetime must be > 0");
    }
    const auto from = index_of(e.from);
    if (!from || !index_of(e.to)) {
      throw std::invalid_argument("ConnectivityGraph: edge endpoint is not a node");
    }
    ++degree[*from];
  }

  offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  arcs_.resize(edges_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const std::size_t from = *index_of(edges_[k].from);
    arcs_[fill[from]++] = Arc{*index_of(edges_[k].to), k};
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto first = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last, [](const Arc& a, const Arc& b) { return a.head < b.head; });
    if (std::adjacent_find(first, last, [](const Arc& a, const Arc& b) {
          return a.head == b.head;
        }) != last) {
      throw std::invalid_argument("ConnectivityGraph: duplicate edge from node " +
                                  std::to_string(nodes_[i]));
    }
  }
}

ConnectivityGraph ConnectivityGraph::undirected(std::vector<NodeId> nodes,
                                                const std::vector<Edge>& edges) {
  std::vector<Edge> both;
  both.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    both.push_back(e);
    both.push_back(Edge{e.to, e.from, e.lifetime});
  }
  return ConnectivityGraph(std::move(nodes), std::move(both));
}

std::optional<std::size_t> ConnectivityGraph::index_of(NodeId id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t ConnectivityGraph::checked_index(NodeId id) const {
  const auto index = index_of(id);
  if (!index) throw std::out_of_range("unknown node id " + std::to_string(id));
  return *index;
}

std::span<const ConnectivityGraph::Arc> ConnectivityGraph::arcs(std::size_t index) const {
  return std::span<const Arc>(arcs_).subspan(offsets_[index], offsets_[index + 1] - offsets_[index]);
}

std::optional<std::size_t> ConnectivityGraph::find_edge(NodeId from, NodeId to) const {
  const auto a = index_of(from);
  const auto b = index_of(to);
  if (!a || !b) return std::nullopt;
  const auto list = arcs(*a);
  const auto it = std::lower_bound(list.begin(), list.end(), *b,
                                   [](const Arc& arc, std::size_t head) { return arc.head < head; });
  if (it == list.end() || it->head != *b) return std::nullopt;
  return it->edge;
}

ConnectivityGraph build_graph(std::span<const NodeState> states, const GraphBuildParams& params) {
  if (!(params.range > 0.0)) throw std::invalid_argument("build_graph: range must be > 0");
  if (!(params.tau_cutoff >= 0.0 && params.tau_cutoff < params.search.horizon)) {
    throw std::invalid_argument("build_graph: need 0 <= tau_cutoff < tau_max");
  }
  std::vector<NodeId> ids;
  ids.reserve(states.size());
  for (const NodeState& s : states) ids.push_back(s.node_id);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (distance(states[i].position(), states[j].position()) > params.range) continue;
      const LifetimeEstimate est = link_lifetime(states[i], states[j], params.range, params.search);
      if (est.lifetime <= params.tau_cutoff) continue;
      edges.push_back(Edge{states[i].node_id, states[j].node_id, est.lifetime});
      edges.push_back(Edge{states[j].node_id, states[i].node_id, est.lifetime});
    }
  }
  return ConnectivityGraph(std::move(ids), std::move(edges));
}

ConnectivityGraph range_graph(std::span<const NodeId> ids, std::span<const Vec3> positions,
                              double range) {
  if (ids.size() != positions.size()) {
    throw std::invalid_argument("range_graph: ids and positions differ in length");
  }
  constexpr double kUnknown = std::numeric_limits<double>::infinity();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (distance(positions[i], positions[j]) > range) continue;
      edges.push_back(Edge{ids[i], ids[j], kUnknown});
      edges.push_back(Edge{ids[j], ids[i], kUnknown});
    }
  }
  return ConnectivityGraph({ids.begin(), ids.end()}, std::move(edges));
}

std::vector<NodeId> neighbors(const ConnectivityGraph& g, NodeId id) {
  std::vector<NodeId> out;
  for (const auto& arc : g.arcs(g.checked_index(id))) out.push_back(g.id_at(arc.head));
  return out;
}

}  // namespace fanet
