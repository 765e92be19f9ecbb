#include "fanet/load_tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fanet/topology.hpp"

namespace fanet {

std::uint32_t LoadVector::at(NodeId id) const {
  const auto it = loads_.find(id);
  return it == loads_.end() ? 0 : it->second;
}

void LoadVector::set(NodeId id, std::uint32_t load) {
  if (load == 0) {
    loads_.erase(id);
  } else {
    loads_[id] = load;
  }
}

void LoadVector::increment(NodeId id) { ++loads_[id]; }

void LoadVector::decrement(NodeId id) {
  const auto it = loads_.find(id);
  if (it == loads_.end()) {
    throw std::logic_error("load underflow at node " + std::to_string(id));
  }
  if (--it->second == 0) loads_.erase(it);
}

std::uint64_t LoadVector::total() const {
  std::uint64_t sum = 0;
  for (const auto& [id, load] : loads_) sum += load;
  return sum;
}

bool operator==(const LoadVector& a, const LoadVector& b) { return a.loads_ == b.loads_; }

RouteLease LoadTracker::install(std::span<const NodeId> route_nodes, const ConnectivityGraph& g) {
  if (route_nodes.empty()) throw std::invalid_argument("install: empty route");
  for (std::size_t k = 0; k + 1 < route_nodes.size(); ++k) {
    if (!g.find_edge(route_nodes[k], route_nodes[k + 1])) {
      throw std::invalid_argument("install: route hop " + std::to_string(route_nodes[k]) + "->" +
                                  std::to_string(route_nodes[k + 1]) + " is not a graph edge");
    }
  }

  std::vector<NodeId> affected;
  for (const NodeId node : route_nodes) {
    affected.push_back(node);
    for (const NodeId n : neighbors(g, node)) affected.push_back(n);
  }
  std::sort(affected.begin(), affected.end());
  affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

  for (const NodeId node : affected) loads_.increment(node);

  RouteLease lease{next_id_++, {route_nodes.begin(), route_nodes.end()}, affected, true};
  active_.emplace(lease.id, std::move(affected));
  return lease;
}

void LoadTracker::teardown(RouteLease& lease) {
  const auto it = active_.find(lease.id);
  if (!lease.active || it == active_.end()) {
    throw std::logic_error("teardown: lease " + std::to_string(lease.id) + " is not active");
  }
  for (const NodeId node : it->second) loads_.decrement(node);
  active_.erase(it);
  lease.active = false;
}

}  // namespace fanet
