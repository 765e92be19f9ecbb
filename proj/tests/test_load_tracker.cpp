#include <random>

#include "doctest.h"
#include "fanet/load_tracker.hpp"
#include "fanet/router.hpp"
#include "oracles.hpp"

using namespace fanet;

namespace {

// a=1, b=2, c=3 on a line; d=4 hangs off b; e=5, f=6 form a separate pair.
ConnectivityGraph sample_graph() {
  return ConnectivityGraph::undirected(
      {1, 2, 3, 4, 5, 6}, {{1, 2, 9.0}, {2, 3, 9.0}, {2, 4, 9.0}, {5, 6, 9.0}});
}

}  // namespace

TEST_CASE("LoadVector") {
  LoadVector v;
  CHECK(v.at(3) == 0);
  v.increment(3);
  v.increment(3);
  v.set(8, 4);
  CHECK(v.at(3) == 2);
  CHECK(v.total() == 6);
  v.decrement(3);
  v.decrement(3);
  CHECK(v.entries().count(3) == 0);
  CHECK_THROWS_AS(v.decrement(3), std::logic_error);
  v.set(8, 0);
  CHECK(v.all_zero());
  CHECK(v == LoadVector{});
}

TEST_CASE("line route without outside neighbors") {
  const ConnectivityGraph g = ConnectivityGraph::undirected({1, 2, 3}, {{1, 2, 9.0}, {2, 3, 9.0}});
  LoadTracker t;
  const std::vector<NodeId> route{1, 2, 3};
  RouteLease lease = t.install(route, g);
  CHECK(lease.affected == std::vector<NodeId>{1, 2, 3});
  for (NodeId n : {1u, 2u, 3u}) CHECK(t.loads().at(n) == 1);
  t.teardown(lease);
  CHECK(t.loads().all_zero());
  CHECK_FALSE(lease.active);
  CHECK_THROWS_AS(t.teardown(lease), std::logic_error);
}

TEST_CASE("neighbors of the route count once") {
  const ConnectivityGraph g = sample_graph();
  LoadTracker t;
  const std::vector<NodeId> route{1, 2, 3};
  RouteLease lease = t.install(route, g);
  CHECK(lease.affected == std::vector<NodeId>{1, 2, 3, 4});
  // Node 2 neighbors every other route node yet gets exactly one.
  for (NodeId n : {1u, 2u, 3u, 4u}) CHECK(t.loads().at(n) == 1);
  CHECK(t.loads().at(5) == 0);
}

TEST_CASE("concurrent routes add and remove independently") {
  const ConnectivityGraph g = sample_graph();
  LoadTracker t;
  const std::vector<NodeId> r1{1, 2, 3};
  const std::vector<NodeId> r2{5, 6};
  const std::vector<NodeId> r3{4, 2};
  RouteLease a = t.install(r1, g);
  RouteLease b = t.install(r2, g);
  CHECK(t.loads().total() == a.affected.size() + b.affected.size());
  RouteLease c = t.install(r3, g);
  CHECK(t.loads().at(2) == 2);
  t.teardown(a);
  CHECK(t.loads().at(2) == 1);
  CHECK(t.loads().at(1) == 1);  // still a neighbor of route 4-2
  t.teardown(c);
  t.teardown(b);
  CHECK(t.loads().all_zero());
  CHECK(t.active_count() == 0);
}

TEST_CASE("install rejects non-paths") {
  const ConnectivityGraph g = sample_graph();
  LoadTracker t;
  const std::vector<NodeId> bad{1, 3};
  CHECK_THROWS_AS(t.install(bad, g), std::invalid_argument);
  CHECK_THROWS_AS(t.install(std::vector<NodeId>{}, g), std::invalid_argument);
  CHECK(t.loads().all_zero());

  LoadTracker other;
  RouteLease foreign = other.install(std::vector<NodeId>{5, 6}, g);
  CHECK_THROWS_AS(t.teardown(foreign), std::logic_error);
}

TEST_CASE("affected sets are frozen at install time") {
  LoadTracker t;
  const ConnectivityGraph before = sample_graph();
  RouteLease lease = t.install(std::vector<NodeId>{1, 2}, before);
  // Node 4 drifts away and 5 arrives; teardown still releases the old set.
  const ConnectivityGraph after = ConnectivityGraph::undirected(
      {1, 2, 3, 4, 5, 6}, {{1, 2, 9.0}, {2, 3, 9.0}, {2, 5, 9.0}});
  RouteLease other = t.install(std::vector<NodeId>{1, 2}, after);
  t.teardown(lease);
  CHECK(t.loads().at(4) == 0);
  CHECK(t.loads().at(5) == 1);
  t.teardown(other);
  CHECK(t.loads().all_zero());
}

TEST_CASE("fuzzed install/teardown matches a full recount") {
  std::mt19937_64 rng(99);
  std::vector<RouteLease> live;
  LoadTracker t;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int operations = 10000;
  for (int op = 0; op < operations; ++op) {
    if (live.empty() || u(rng) < 0.55) {
      // Fresh topology per install so affected sets differ across leases.
      const auto inst = oracle::random_instance(rng, 12, 0.15);
      const ConnectivityGraph g = ConnectivityGraph::undirected(inst.nodes, inst.undirected);
      const auto path = *bfs_shortest_path(g, inst.src, inst.dst);
      RouteLease lease = t.install(path, g);

      // Affected set recomputed from the raw edge list.
      std::set<NodeId> expect(path.begin(), path.end());
      for (const auto& e : inst.undirected) {
        if (std::find(path.begin(), path.end(), e.from) != path.end()) expect.insert(e.to);
        if (std::find(path.begin(), path.end(), e.to) != path.end()) expect.insert(e.from);
      }
      CHECK(std::vector<NodeId>(expect.begin(), expect.end()) == lease.affected);
      live.push_back(std::move(lease));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
      const std::size_t k = pick(rng);
      t.teardown(live[k]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::map<LeaseId, std::vector<NodeId>> held;
    for (const auto& lease : live) held[lease.id] = lease.affected;
    REQUIRE(t.loads().entries() == oracle::recount(held));
    REQUIRE(t.active_count() == live.size());
  }
  for (auto& lease : live) t.teardown(lease);
  CHECK(t.loads().all_zero());
}
