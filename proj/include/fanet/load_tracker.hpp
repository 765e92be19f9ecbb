#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fanet/kinematics.hpp"

namespace fanet {

class ConnectivityGraph;

// Controller-side node load: the number of active routes whose affected set
// contains the node. Unknown nodes read as zero.
class LoadVector {
 public:
  LoadVector() = default;

  std::uint32_t at(NodeId id) const;
  void set(NodeId id, std::uint32_t load);
  void increment(NodeId id);
  void decrement(NodeId id);  // throws std::logic_error when the load is already 0

  std::uint64_t total() const;
  bool all_zero() const { return total() == 0; }
  const std::map<NodeId, std::uint32_t>& entries() const { return loads_; }

  friend bool operator==(const LoadVector&, const LoadVector&);

 private:
  std::map<NodeId, std::uint32_t> loads_;  // zero entries are erased
};

using LeaseId = std::uint64_t;

struct RouteLease {
  LeaseId id = 0;
  std::vector<NodeId> nodes;
  std::vector<NodeId> affected;  // sorted, frozen at install time
  bool active = false;
};

class LoadTracker {
 public:
  // Affected set = route nodes plus their one-hop neighbors in g; each gets +1.
  // Throws std::invalid_argument if the node list is not a path in g.
  RouteLease install(std::span<const NodeId> route_nodes, const ConnectivityGraph& g);

  // Throws std::logic_error if the lease is not active in this tracker.
  void teardown(RouteLease& lease);

  const LoadVector& loads() const { return loads_; }
  std::size_t active_count() const { return active_.size(); }
  const std::map<LeaseId, std::vector<NodeId>>& active_leases() const { return active_; }

 private:
  LoadVector loads_;
  std::map<LeaseId, std::vector<NodeId>> active_;
  LeaseId next_id_ = 1;
};

}  // namespace fanet
