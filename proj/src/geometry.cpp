#include "cardest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include "cardest/errors.hpp"
#include "cardest/rng.hpp"

namespace cardest {

void FieldConfig::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidConfig("field length must be positive");
  if (!(width > 0.0) || !std::isfinite(width)) throw InvalidConfig("field width must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidConfig("radius must be positive");
}

double distance(Point p, Point q, const FieldConfig& field) noexcept {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  if (field.mode == DistanceMode::toroidal) {
    dx = std::min(dx, field.length - dx);
    dy = std::min(dy, field.width - dy);
  }
  return std::hypot(dx, dy);
}

Network::Network(std::uint32_t n_max, FieldConfig field,
                 std::vector<std::pair<NodeId, Point>> placements)
    : n_max_(n_max), field_(field), alive_mask_(n_max), positions_(n_max), adjacency_(n_max) {
  field_.validate();
  if (n_max == 0) throw InvalidConfig("n_max must be at least 1");
  if (placements.size() > n_max) throw InvalidConfig("more alive nodes than n_max");

  for (const auto& [id, p] : placements) {
    const auto i = index_of(id);
    if (i >= n_max) throw InvalidConfig("node id " + std::to_string(i) + " outside [0, n_max)");
    if (!alive_mask_.insert(i)) throw InvalidConfig("duplicate node id " + std::to_string(i));
    if (!(p.x >= 0.0 && p.x <= field_.length && p.y >= 0.0 && p.y <= field_.width)) {
      throw InvalidConfig("position of node " + std::to_string(i) + " outside the field");
    }
    positions_[i] = p;
    alive_.push_back(id);
  }
  std::sort(alive_.begin(), alive_.end());

  const double r = field_.radius;
  for (std::size_t a = 0; a < alive_.size(); ++a) {
    const Point pa = *positions_[index_of(alive_[a])];
    for (std::size_t b = a + 1; b < alive_.size(); ++b) {
      const Point pb = *positions_[index_of(alive_[b])];
      if (distance(pa, pb, field_) <= r) {
        adjacency_[index_of(alive_[a])].push_back(alive_[b]);
        adjacency_[index_of(alive_[b])].push_back(alive_[a]);
      }
    }
  }
  // alive_ is ascending, so appends above keep each list ascending.
}

std::vector<NodeId> Network::dead() const {
  std::vector<NodeId> out;
  out.reserve(n_max_ - alive_.size());
  for (std::uint32_t i = 0; i < n_max_; ++i) {
    if (!alive_mask_.contains(i)) out.push_back(node_id(i));
  }
  return out;
}

bool Network::is_alive(NodeId id) const noexcept { return alive_mask_.contains(index_of(id)); }

void Network::require_alive(NodeId id) const {
  if (!is_alive(id)) throw NotAlive("node " + std::to_string(index_of(id)) + " is not alive");
}

Point Network::position(NodeId id) const {
  require_alive(id);
  return *positions_[index_of(id)];
}

std::span<const NodeId> Network::neighbors(NodeId id) const {
  require_alive(id);
  return adjacency_[index_of(id)];
}

Network generate_network(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                         std::uint64_t seed) {
  field.validate();
  if (n < 1 || n > n_max) throw InvalidConfig("need 1 <= n <= n_max");

  Rng rng(derive_seed(seed, Stream::network));
  std::vector<std::uint32_t> roster(n_max);
  for (std::uint32_t i = 0; i < n_max; ++i) roster[i] = i;
  for (std::uint32_t k = 0; k < n; ++k) {
    const auto j = k + static_cast<std::uint32_t>(rng.below(n_max - k));
    std::swap(roster[k], roster[j]);
  }
  roster.resize(n);
  std::sort(roster.begin(), roster.end());

  std::vector<std::pair<NodeId, Point>> placements;
  placements.reserve(n);
  for (auto i : roster) {
    const double x = rng.uniform01() * field.length;
    const double y = rng.uniform01() * field.width;
    placements.emplace_back(node_id(i), Point{x, y});
  }
  return Network(n_max, field, std::move(placements));
}

Network generate_connected_network(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                                   std::uint64_t seed, int max_attempts) {
  auto net = generate_network(n, n_max, field, seed);
  for (int attempt = 0; !is_connected(net); ++attempt) {
    if (attempt >= max_attempts) {
      throw InvalidConfig("no connected network after " + std::to_string(max_attempts) + " attempts");
    }
    net = generate_network(n, n_max, field,
                           derive_seed(seed, Stream::network_retry, static_cast<std::uint64_t>(attempt)));
  }
  return net;
}

std::vector<NodeId> neighbors(const Network& net, NodeId i) {
  auto span = net.neighbors(i);
  return {span.begin(), span.end()};
}

std::vector<int> hop_distances(const Network& net, NodeId source) {
  std::vector<int> dist(net.n_max(), -1);
  net.neighbors(source);  // validates
  dist[index_of(source)] = 0;
  std::deque<NodeId> frontier{source};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : net.neighbors(u)) {
      if (dist[index_of(v)] < 0) {
        dist[index_of(v)] = dist[index_of(u)] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<NodeId> t_degree_ball(const Network& net, NodeId i, int t) {
  if (t < 0) throw InvalidArgument("t must be non-negative");
  const auto dist = hop_distances(net, i);
  std::vector<NodeId> ball;
  for (NodeId j : net.alive()) {
    const int d = dist[index_of(j)];
    if (d >= 0 && d <= t) ball.push_back(j);
  }
  return ball;
}

bool is_connected(const Network& net) {
  if (net.size() <= 1) return true;
  const auto dist = hop_distances(net, net.alive().front());
  return std::all_of(net.alive().begin(), net.alive().end(),
                     [&](NodeId j) { return dist[index_of(j)] >= 0; });
}

std::optional<int> diameter(const Network& net) {
  int best = 0;
  for (NodeId i : net.alive()) {
    const auto dist = hop_distances(net, i);
    for (NodeId j : net.alive()) {
      const int d = dist[index_of(j)];
      if (d < 0) return std::nullopt;
      best = std::max(best, d);
    }
  }
  return best;
}

double expected_ball_increment(double n, const FieldConfig& field, int t) {
  if (t < 1) throw InvalidArgument("t must be at least 1");
  return n * std::numbers::pi * field.radius * field.radius * (2.0 * t - 1.0) / field.area();
}

}  // namespace cardest
