#include "fanet/router.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fanet {

Weights::Weights(double length, double lifetime, double load) : w_{length, lifetime, load} {
  for (const double w : w_) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw std::invalid_argument("weights must lie in [0, 1], got " + std::to_string(w));
    }
  }
  if (std::abs(length + lifetime + load - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1");
  }
}

std::string_view to_string(Objective objective) {
  return objective == Objective::blp ? "blp" : "bottleneck";
}

double edge_cost(const Edge& edge, const LoadVector& loads, const Weights& w) {
  return w.lifetime() * (1.0 / edge.lifetime) + w.load() * static_cast<double>(loads.at(edge.to));
}

Route evaluate(std::span<const NodeId> path, const ConnectivityGraph& g, const LoadVector& loads,
               const Weights& w) {
  if (path.size() < 2) throw std::invalid_argument("evaluate: a path needs at least two nodes");
  std::vector<NodeId> seen(path.begin(), path.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("evaluate: path revisits a node");
  }

  Route r;
  r.nodes.assign(path.begin(), path.end());
  r.hop_count = path.size() - 1;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto e = g.find_edge(path[k], path[k + 1]);
    if (!e) {
      throw std::invalid_argument("evaluate: " + std::to_string(path[k]) + "->" +
                                  std::to_string(path[k + 1]) + " is not an edge");
    }
    const Edge& edge = g.edges()[*e];
    r.inverse_lifetime = std::max(r.inverse_lifetime, 1.0 / edge.lifetime);
    // The destination has no outgoing path edge, so only tails count.
    r.path_load = std::max(r.path_load, static_cast<double>(loads.at(path[k])));
    r.bottleneck_cost = std::max(r.bottleneck_cost, edge_cost(edge, loads, w));
  }
  const double hops = static_cast<double>(r.hop_count);
  r.objective_blp = w.length() * hops + w.lifetime() * r.inverse_lifetime + w.load() * r.path_load;
  r.objective_bottleneck = w.length() * hops + r.bottleneck_cost;
  return r;
}

std::optional<std::vector<NodeId>> bfs_shortest_path(const ConnectivityGraph& g, NodeId src,
                                                     NodeId dst, std::span<const std::uint8_t> alive) {
  const std::size_t s = g.checked_index(src);
  const std::size_t d = g.checked_index(dst);
  if (s == d) return std::vector<NodeId>{src};

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(g.node_count(), kNone);
  parent[s] = s;
  std::deque<std::size_t> queue{s};
  while (!queue.empty() && parent[d] == kNone) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& arc : g.arcs(u)) {
      if (!alive.empty() && !alive[arc.edge]) continue;
      if (parent[arc.head] != kNone) continue;
      parent[arc.head] = u;
      if (arc.head == d) break;
      queue.push_back(arc.head);
    }
  }
  if (parent[d] == kNone) return std::nullopt;

  std::vector<NodeId> path;
  for (std::size_t v = d; v != s; v = parent[v]) path.push_back(g.id_at(v));
  path.push_back(src);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

void check_endpoints(const ConnectivityGraph& g, NodeId src, NodeId dst) {
  g.checked_index(src);
  g.checked_index(dst);
  if (src == dst) throw std::invalid_argument("route request with src == dst");
}

// a beats b: lower objective, then fewer hops, then lexicographically smaller.
bool better(const Route& a, const Route& b, Objective kind) {
  const double oa = a.objective(kind);
  const double ob = b.objective(kind);
  if (oa != ob) return oa < ob;
  if (a.hop_count != b.hop_count) return a.hop_count < b.hop_count;
  return a.nodes < b.nodes;
}

}  // namespace

SolveTrace solve_traced(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                        NodeId dst, const Weights& w, Objective objective) {
  check_endpoints(g, src, dst);

  const auto edges = g.edges();
  std::vector<double> cost(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) cost[e] = edge_cost(edges[e], loads, w);

  // Descending by cost; pruning always removes a prefix of this order.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cost[a] > cost[b]; });

  std::vector<std::uint8_t> alive(edges.size(), 1);
  std::size_t pruned = 0;

  SolveTrace trace;
  while (auto path = bfs_shortest_path(g, src, dst, alive)) {
    ++trace.iterations;
    if (trace.iterations > edges.size()) {
      throw std::logic_error("solve: pruning loop exceeded |E| iterations");
    }
    Route candidate = evaluate(*path, g, loads, w);
    if (!trace.route || candidate.objective(objective) < trace.route->objective(objective)) {
      trace.route = candidate;
    }
    const double threshold = candidate.bottleneck_cost;
    const std::size_t before = pruned;
    while (pruned < order.size() && cost[order[pruned]] >= threshold) {
      alive[order[pruned]] = 0;
      ++pruned;
    }
    if (pruned == before) throw std::logic_error("solve: pruning removed no edge");
    trace.candidates.push_back(std::move(candidate));
  }
  return trace;
}

std::optional<Route> solve(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                           NodeId dst, const Weights& w, Objective objective) {
  return solve_traced(g, loads, src, dst, w, objective).route;
}

namespace {

struct Enumerator {
  const ConnectivityGraph& g;
  const LoadVector& loads;
  const Weights& w;
  Objective kind;
  std::size_t dst;
  std::vector<char> on_path;
  std::vector<NodeId> path;
  std::optional<Route> best;

  void visit(std::size_t u) {
    if (u == dst) {
      Route r = evaluate(path, g, loads, w);
      if (!best || better(r, *best, kind)) best = std::move(r);
      return;
    }
    for (const auto& arc : g.arcs(u)) {
      if (on_path[arc.head]) continue;
      on_path[arc.head] = 1;
      path.push_back(g.id_at(arc.head));
      visit(arc.head);
      path.pop_back();
      on_path[arc.head] = 0;
    }
  }
};

}  // namespace

std::optional<Route> oracle_solve(const ConnectivityGraph& g, const LoadVector& loads, NodeId src,
                                  NodeId dst, const Weights& w, Objective objective,
                                  std::size_t max_nodes) {
  if (g.node_count() > max_nodes) {
    throw std::length_error("oracle_solve: graph has " + std::to_string(g.node_count()) +
                            " nodes, limit is " + std::to_string(max_nodes));
  }
  check_endpoints(g, src, dst);
  const std::size_t s = g.checked_index(src);
  Enumerator en{g, loads, w, objective, g.checked_index(dst), std::vector<char>(g.node_count(), 0),
                {src}, std::nullopt};
  en.on_path[s] = 1;
  en.visit(s);
  return en.best;
}

}  // namespace fanet
