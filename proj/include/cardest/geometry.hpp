#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cardest/id_set.hpp"

namespace cardest {

// Roster identifier in [0, n_max).
enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr NodeId node_id(std::uint32_t i) noexcept { return static_cast<NodeId>(i); }

enum class DistanceMode { planar, toroidal };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Rectangular deployment region [0, length] x [0, width] with a common
// circular connectivity radius.
struct FieldConfig {
  double length = 1.0;
  double width = 1.0;
  double radius = 0.1;
  DistanceMode mode = DistanceMode::planar;

  double area() const noexcept { return length * width; }
  // Throws InvalidConfig unless length, width and radius are positive.
  void validate() const;

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

// Euclidean distance; in toroidal mode each axis wraps (min(|d|, L - |d|)).
double distance(Point p, Point q, const FieldConfig& field) noexcept;

// Ground-truth network. Immutable after construction.
//
// Dead IDs carry no position. Adjacency is computed once at construction with
// the inclusive rule d <= R.
class Network {
 public:
  // `placements` lists every alive node with its position. Throws InvalidConfig
  // on duplicate or out-of-range IDs, or positions outside the field.
  Network(std::uint32_t n_max, FieldConfig field, std::vector<std::pair<NodeId, Point>> placements);

  std::uint32_t n_max() const noexcept { return n_max_; }
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(alive_.size()); }
  const FieldConfig& field() const noexcept { return field_; }

  // Ascending.
  std::span<const NodeId> alive() const noexcept { return alive_; }
  std::vector<NodeId> dead() const;
  const IdSet& alive_set() const noexcept { return alive_mask_; }

  bool is_alive(NodeId id) const noexcept;
  Point position(NodeId id) const;

  // Alive neighbours of `id`, ascending. Throws NotAlive for dead/unknown IDs.
  std::span<const NodeId> neighbors(NodeId id) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void require_alive(NodeId id) const;

  std::uint32_t n_max_;
  FieldConfig field_;
  std::vector<NodeId> alive_;
  IdSet alive_mask_;
  std::vector<std::optional<Point>> positions_;
  std::vector<std::vector<NodeId>> adjacency_;
};

// n alive IDs sampled uniformly without replacement from [0, n_max), each
// placed uniformly in the field. Deterministic in `seed`.
Network generate_network(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                         std::uint64_t seed);

// Redraws (on a deterministic retry substream) until the alive graph is
// connected. Throws InvalidConfig after `max_attempts` failures.
Network generate_connected_network(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                                   std::uint64_t seed, int max_attempts = 1000);

std::vector<NodeId> neighbors(const Network& net, NodeId i);

// Hop distance from `source` to every roster ID; -1 for unreachable or dead.
std::vector<int> hop_distances(const Network& net, NodeId source);

// B_t(i): alive nodes within t hops of i (including i), ascending.
std::vector<NodeId> t_degree_ball(const Network& net, NodeId i, int t);

bool is_connected(const Network& net);

// Largest hop distance between two alive nodes; nullopt if disconnected.
std::optional<int> diameter(const Network& net);

// Boundary-free approximation of the mean |B_t \ B_{t-1}|: n pi R^2 (2t-1) / (LW).
double expected_ball_increment(double n, const FieldConfig& field, int t);

}  // namespace cardest
