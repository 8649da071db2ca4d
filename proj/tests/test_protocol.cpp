#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "doctest.h"

#include "cardest/errors.hpp"
#include "cardest/geometry.hpp"
#include "cardest/protocol.hpp"

using namespace cardest;

namespace {

std::shared_ptr<const Network> line(std::vector<double> xs, std::uint32_t n_max = 0) {
  std::vector<std::pair<NodeId, Point>> pl;
  for (std::uint32_t i = 0; i < xs.size(); ++i) pl.push_back({node_id(i), Point{xs[i], 0.5}});
  if (n_max == 0) n_max = static_cast<std::uint32_t>(xs.size());
  return std::make_shared<const Network>(n_max, FieldConfig{}, std::move(pl));
}

ProtocolConfig flood() {
  ProtocolConfig c;
  c.f_initial = 1.0;
  c.erasure = ErasureRule::constant(0.0);
  return c;
}

std::vector<NodeId> ids(std::initializer_list<std::uint32_t> xs) {
  std::vector<NodeId> v;
  for (auto x : xs) v.push_back(node_id(x));
  return v;
}

std::vector<NodeId> tx(const SimState& s) { return {s.transmitted_prev().begin(), s.transmitted_prev().end()}; }

}  // namespace

TEST_CASE("config validation") {
  ProtocolConfig c;
  c.f_initial = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.f_initial = 0.5;
  c.erasure = ErasureRule::constant(1.0);
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.erasure = ErasureRule::per_node({{node_id(2), 0.3}}, 0.1);
  CHECK_NOTHROW(c.validate());
  CHECK(c.erasure.for_node(node_id(2)) == 0.3);
  CHECK(c.erasure.for_node(node_id(5)) == 0.1);
}

TEST_CASE("init") {
  auto net = std::make_shared<const Network>(generate_network(30, 40, FieldConfig{}, 3));
  ProtocolConfig c;
  c.f_initial = 0.3;
  c.topology_mode = true;
  const SimState s = init(net, c);
  CHECK(s.round() == 0);
  CHECK(s.transmitted_prev().empty());
  CHECK(s.nodes().size() == 30);
  for (const auto& n : s.nodes()) {
    CHECK(n.packet == std::vector<NodeId>{n.id});
    CHECK(n.f == 0.3);
    CHECK(n.discovered.empty());
    REQUIRE(n.coords.size() == 1);
    CHECK(n.coords.at(n.id) == net->position(n.id));
  }
  CHECK_THROWS_AS(s.node(net->dead().front()), NotAlive);
}

TEST_CASE("two-node flood trace") {
  auto net = line({0.5, 0.55});
  Rng rng(1);
  SimState s = init(net, flood());
  advance(s, rng);
  // Nothing had been sent before round 1.
  CHECK(s.node(node_id(0)).packet == ids({0}));
  CHECK(tx(s) == ids({0, 1}));
  advance(s, rng);
  CHECK(s.node(node_id(0)).packet == ids({1, 0}));
  CHECK(s.node(node_id(1)).packet == ids({0, 1}));
  CHECK(discovered_neighbors(s, node_id(0)) == ids({1}));
  CHECK(discovered_neighbors(s, node_id(1)) == ids({0}));
  CHECK(s.node(node_id(0)).f == 1.0);
}

TEST_CASE("rounds=0 leaves the state unchanged") {
  auto net = std::make_shared<const Network>(generate_network(20, 25, FieldConfig{}, 9));
  Rng rng(4);
  const SimState s = init(net, ProtocolConfig{});
  CHECK(run(s, 0, rng) == s);
  CHECK_THROWS_AS(run(s, -1, rng), InvalidArgument);
  CHECK(discovered_neighbors(s, net->alive().front()).empty());
}

TEST_CASE("two innovative packets in one round halve the gap twice") {
  auto net = line({0.40, 0.46, 0.52});
  ProtocolConfig c;
  c.f_initial = 0.3;
  c.erasure = ErasureRule::constant(0.0);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
    Rng rng(seed);
    SimState s = init(net, c);
    advance(s, rng);
    if (tx(s) != ids({0, 2})) continue;
    advance(s, rng);
    const auto& tx = s.transmitted_prev();
    if (std::find(tx.begin(), tx.end(), node_id(1)) != tx.end()) continue;
    found = true;
    const NodeState& mid = s.node(node_id(1));
    CHECK(mid.f == doctest::Approx(((0.3 + 1) / 2 + 1) / 2));
    CHECK(mid.packet == ids({0, 2, 1}));
  }
  CHECK(found);
}

TEST_CASE("non-innovative packets only update discovery") {
  auto net = line({0.5, 0.55});
  ProtocolConfig c = flood();
  Rng rng(2);
  SimState s = run(init(net, c), 3, rng);
  CHECK(s.node(node_id(0)).packet == ids({1, 0}));
  CHECK(s.node(node_id(0)).f == 1.0);
}

TEST_CASE("tiny f_initial spreads nothing") {
  auto net = std::make_shared<const Network>(generate_network(100, 120, FieldConfig{}, 11));
  ProtocolConfig c;
  c.f_initial = std::numeric_limits<double>::min();
  Rng rng(5);
  const SimState s = run(init(net, c), 30, rng);
  for (const auto& n : s.nodes()) CHECK(n.packet.size() == 1);
}

TEST_CASE("f stays below one under repeated innovation") {
  auto net = std::make_shared<const Network>(generate_network(200, 200, FieldConfig{1, 1, 0.3}, 2));
  ProtocolConfig c;
  c.f_initial = 0.9;
  c.erasure = ErasureRule::constant(0.0);
  Rng rng(8);
  SimState s = init(net, c);
  for (int r = 0; r < 10; ++r) {
    advance(s, rng);
    for (const auto& n : s.nodes()) CHECK(n.f < 1.0);
  }
}

TEST_CASE("flood oracle completes in diameter + 1 rounds") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto net = std::make_shared<const Network>(
        generate_connected_network(40, 50, FieldConfig{1, 1, 0.3}, seed));
    const int d = *diameter(*net);
    Rng rng(seed);
    SimState s = init(net, flood());
    s = run(std::move(s), d, rng);
    const bool complete_early =
        std::all_of(s.nodes().begin(), s.nodes().end(), [&](const NodeState& n) { return n.packet.size() == 40; });
    CHECK_FALSE(complete_early);
    advance(s, rng);
    for (const auto& n : s.nodes()) {
      CHECK(n.packet.size() == 40);
      CHECK(n.packet.back() == n.id);
      CHECK(n.members == net->alive_set());
    }
  }
}

TEST_CASE("determinism") {
  auto net = std::make_shared<const Network>(generate_network(300, 350, FieldConfig{}, 17));
  Rng a(99), b(99);
  const SimState s0 = init(net, ProtocolConfig{});
  CHECK(run(s0, 8, a) == run(s0, 8, b));
}

TEST_CASE("packet size accounting") {
  CHECK(id_bits(350) == 9);
  CHECK(id_bits(512) == 9);
  CHECK(id_bits(513) == 10);
  CHECK(id_bits(1) == 0);

  auto net = std::make_shared<const Network>(generate_connected_network(300, 350, FieldConfig{1, 1, 0.3}, 1));
  ProtocolConfig c = flood();
  SimState s = init(net, c);
  CHECK(packet_bits(s, net->alive().front()) == 9);
  Rng rng(3);
  s = run(std::move(s), *diameter(*net) + 1, rng);
  CHECK(packet_bits(s, net->alive().front()) == 2700);

  c.topology_mode = true;
  SimState t = init(net, c);
  Rng rng2(3);
  t = run(std::move(t), *diameter(*net) + 1, rng2);
  CHECK(packet_bits(t, net->alive().front()) == 21900);
  CHECK(topology_bound_bits(300, 350, 32) == 2 * 32 * 300 * 9);
}

TEST_CASE("high erasure still discovers every neighbour eventually") {
  auto net = std::make_shared<const Network>(generate_network(30, 30, FieldConfig{1, 1, 0.3}, 6));
  ProtocolConfig c;
  c.f_initial = 1.0;
  c.erasure = ErasureRule::constant(0.9);
  Rng rng(12);
  const SimState s = run(init(net, c), 400, rng);
  for (NodeId i : net->alive()) {
    const auto nb = net->neighbors(i);
    CHECK(discovered_neighbors(s, i) == std::vector<NodeId>(nb.begin(), nb.end()));
  }
}

TEST_CASE("trace CSV") {
  auto net = line({0.5, 0.55});
  Rng rng(1);
  SimState s = init(net, flood());
  std::ostringstream out;
  write_trace_header(out);
  write_trace_rows(out, s);
  advance(s, rng);
  write_trace_rows(out, s);
  CHECK(out.str() ==
        "round,node,packet_size,f,transmitted\n"
        "0,0,1,1,0\n0,1,1,1,0\n"
        "1,0,1,1,1\n1,1,1,1,1\n");
}
