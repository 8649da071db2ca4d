#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cardest/errors.hpp"
#include "cardest/geometry.hpp"
#include "cardest/rng.hpp"

using namespace cardest;

namespace {

Network line_network(std::vector<double> xs, double radius = 0.1) {
  std::vector<std::pair<NodeId, Point>> pl;
  for (std::uint32_t i = 0; i < xs.size(); ++i) pl.push_back({node_id(i), Point{xs[i], 0.5}});
  return Network(static_cast<std::uint32_t>(xs.size()), FieldConfig{1.0, 1.0, radius, DistanceMode::planar},
                 std::move(pl));
}

}  // namespace

TEST_CASE("distance") {
  const FieldConfig big{10, 10, 1, DistanceMode::planar};
  CHECK(distance({0, 0}, {3, 4}, big) == doctest::Approx(5.0));
  const FieldConfig torus{1, 1, 0.1, DistanceMode::toroidal};
  CHECK(distance({0.05, 0.5}, {0.95, 0.5}, torus) == doctest::Approx(0.1));
  CHECK(distance({0.3, 0.7}, {0.3, 0.7}, torus) == 0.0);
  const FieldConfig flat{1, 1, 0.1, DistanceMode::planar};
  CHECK(distance({0.05, 0.5}, {0.95, 0.5}, flat) == doctest::Approx(0.9));
}

TEST_CASE("field validation") {
  CHECK_THROWS_AS(FieldConfig({0, 1, 0.1}).validate(), InvalidConfig);
  CHECK_THROWS_AS(FieldConfig({1, 1, -0.1}).validate(), InvalidConfig);
  CHECK_NOTHROW(FieldConfig{}.validate());
}

TEST_CASE("generate_network sizes and determinism") {
  const FieldConfig field{};
  SUBCASE("single node") {
    const Network net = generate_network(1, 1, field, 7);
    CHECK(net.size() == 1);
    CHECK(net.dead().empty());
    CHECK(net.neighbors(node_id(0)).empty());
  }
  SUBCASE("reference scale") {
    const Network a = generate_network(300, 350, field, 42);
    CHECK(a.size() == 300);
    CHECK(a.dead().size() == 50);
    CHECK(a == generate_network(300, 350, field, 42));
    CHECK_FALSE(a == generate_network(300, 350, field, 43));
    for (NodeId d : a.dead()) {
      CHECK_FALSE(a.is_alive(d));
      CHECK_THROWS_AS(a.position(d), NotAlive);
      CHECK_THROWS_AS(a.neighbors(d), NotAlive);
    }
  }
  CHECK_THROWS_AS(generate_network(5, 4, field, 1), InvalidConfig);
}

TEST_CASE("neighbour rule is inclusive") {
  // 0.5 and 0.625 are exact binary fractions, so the distance is exactly R.
  const Network net = line_network({0.5, 0.625}, 0.125);
  REQUIRE(distance(net.position(node_id(0)), net.position(node_id(1)), net.field()) == 0.125);
  CHECK(net.neighbors(node_id(0)).size() == 1);
  CHECK(net.neighbors(node_id(1)).size() == 1);
}

TEST_CASE("collinear nodes spaced 0.6R") {
  const Network net = line_network({0.4, 0.46, 0.52});
  CHECK(net.neighbors(node_id(0)).size() == 1);
  CHECK(net.neighbors(node_id(1)).size() == 2);
  CHECK(net.neighbors(node_id(2)).size() == 1);
}

TEST_CASE("t-degree balls on a path") {
  const Network net = line_network({0.1, 0.18, 0.26, 0.34});
  CHECK(t_degree_ball(net, node_id(0), 0) == std::vector<NodeId>{node_id(0)});
  CHECK(t_degree_ball(net, node_id(0), 1) == std::vector<NodeId>{node_id(0), node_id(1)});
  CHECK(t_degree_ball(net, node_id(0), 2) == std::vector<NodeId>{node_id(0), node_id(1), node_id(2)});
  CHECK(hop_distances(net, node_id(0)) == std::vector<int>{0, 1, 2, 3});
  CHECK(diameter(net) == 3);
  CHECK(is_connected(net));
  CHECK_FALSE(diameter(line_network({0.1, 0.5})).has_value());
}

TEST_CASE("property: adjacency is symmetric and irreflexive; balls are nested") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng r(seed);
    const FieldConfig field{1.0, 1.0, 0.05 + 0.2 * r.uniform01(),
                            seed % 2 ? DistanceMode::planar : DistanceMode::toroidal};
    const std::uint32_t n_max = 20 + static_cast<std::uint32_t>(r.below(60));
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(r.below(n_max));
    const Network net = generate_network(n, n_max, field, seed);
    for (NodeId i : net.alive()) {
      const auto nb = net.neighbors(i);
      for (NodeId j : nb) {
        CHECK(j != i);
        CHECK(net.is_alive(j));
        CHECK(distance(net.position(i), net.position(j), field) <= field.radius);
        const auto back = net.neighbors(j);
        CHECK(std::find(back.begin(), back.end(), i) != back.end());
      }
      std::size_t prev = 0;
      for (int t = 0; t <= 4; ++t) {
        const auto ball = t_degree_ball(net, i, t);
        CHECK(ball.size() >= prev);
        prev = ball.size();
      }
    }
  }
}

TEST_CASE("connection frequency matches pi R^2 on the torus") {
  const FieldConfig field{1.0, 1.0, 0.1, DistanceMode::toroidal};
  const double p = std::numbers::pi * 0.01;
  std::uint64_t pairs = 0, hits = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Network net = generate_network(40, 40, field, seed);
    for (NodeId i : net.alive()) {
      for (NodeId j : net.neighbors(i)) hits += index_of(j) > index_of(i) ? 1 : 0;
    }
    pairs += 40 * 39 / 2;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(pairs);
  // Pairs sharing a node are weakly dependent; the band is still generous.
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(pairs));
  CHECK(std::abs(freq - p) <= 3 * sigma);
}

TEST_CASE("expected ball increment") {
  const FieldConfig field{};
  CHECK(expected_ball_increment(300, field, 1) == doctest::Approx(3 * std::numbers::pi));
  CHECK(expected_ball_increment(300, field, 2) == doctest::Approx(9 * std::numbers::pi));
  CHECK(expected_ball_increment(0, field, 3) == 0.0);
  CHECK_THROWS_AS(expected_ball_increment(300, field, 0), InvalidArgument);
}

TEST_CASE("first-hop growth on the torus") {
  const FieldConfig field{1.0, 1.0, 0.1, DistanceMode::toroidal};
  const Network net = generate_network(300, 350, field, 5);
  double total = 0;
  for (NodeId i : net.alive()) total += static_cast<double>(net.neighbors(i).size());
  // Each node sees n-1 others, so the mean degree is (n-1) pi R^2.
  const double mean = total / net.size();
  CHECK(std::abs(mean - expected_ball_increment(299, field, 1)) / mean < 0.15);
}
