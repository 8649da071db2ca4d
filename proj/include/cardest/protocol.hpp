#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "cardest/geometry.hpp"
#include "cardest/id_set.hpp"
#include "cardest/rng.hpp"

namespace cardest {

// Per-receiver erasure probability: one constant for every node, or an
// explicit map with the constant as fallback for unlisted nodes.
class ErasureRule {
 public:
  static ErasureRule constant(double q);
  static ErasureRule per_node(std::map<NodeId, double> q, double fallback = 0.0);

  double for_node(NodeId id) const;
  bool is_constant() const noexcept { return per_node_.empty(); }
  double constant_value() const noexcept { return constant_; }
  void validate() const;

 private:
  double constant_ = 0.0;
  std::map<NodeId, double> per_node_;
};

struct ProtocolConfig {
  double f_initial = 0.5;
  ErasureRule erasure = ErasureRule::constant(0.1);
  // Packets also carry (x, y) of each listed node.
  bool topology_mode = false;
  // Bits per coordinate; only used for packet size accounting.
  int coord_bits = 32;

  void validate() const;
};

struct NodeState {
  NodeId id{};
  // Ordered packet; the holder's own ID is always last.
  std::vector<NodeId> packet;
  IdSet members;
  double f = 0.0;
  double f_initial = 0.0;
  double q = 0.0;
  // Neighbours heard at least once, ascending.
  std::vector<NodeId> discovered;
  // Topology mode only: coordinates of every ID in the packet.
  std::map<NodeId, Point> coords;

  bool knows(NodeId j) const noexcept { return members.contains(index_of(j)); }
};

// Full protocol state after `round()` dissemination rounds.
class SimState {
 public:
  int round() const noexcept { return round_; }
  const Network& network() const noexcept { return *net_; }
  std::shared_ptr<const Network> network_ptr() const noexcept { return net_; }
  bool topology_mode() const noexcept { return topology_mode_; }
  int coord_bits() const noexcept { return coord_bits_; }

  // Alive nodes in ascending ID order.
  std::span<const NodeState> nodes() const noexcept { return nodes_; }
  // Throws NotAlive.
  const NodeState& node(NodeId id) const;
  // Nodes that broadcast in the most recent round, ascending.
  std::span<const NodeId> transmitted_prev() const noexcept { return transmitted_prev_; }

  friend bool operator==(const SimState& a, const SimState& b);

 private:
  friend SimState init(std::shared_ptr<const Network> net, const ProtocolConfig& cfg);
  friend void advance(SimState& state, Rng& rng);

  std::shared_ptr<const Network> net_;
  int round_ = 0;
  bool topology_mode_ = false;
  int coord_bits_ = 32;
  std::vector<NodeState> nodes_;
  std::vector<std::int32_t> slot_;  // roster index -> position in nodes_, -1 if dead
  std::vector<NodeId> transmitted_prev_;
};

// Initialization: every alive node holds [own id], f = f_initial, nothing
// discovered, and no node has transmitted.
SimState init(std::shared_ptr<const Network> net, const ProtocolConfig& cfg);

// One synchronous round in place.
//
// Reception: for each alive node i (ascending) and each neighbour j that
// broadcast last round (ascending), one Bernoulli(1 - q_i) draw decides
// whether i hears j's packet as it stood at the end of last round. A heard
// packet always adds j to i's discovered set; if it is innovative the packets
// merge with i's own ID moved to the end and f_i <- (f_i + 1) / 2.
// Transmission: each alive node (ascending) draws u ~ U[0,1); u < f_i makes
// it a transmitter and resets f_i to f_initial.
void advance(SimState& state, Rng& rng);

SimState step(SimState state, Rng& rng);
SimState run(SimState state, int rounds, Rng& rng);

// ceil(log2 n_max): bits needed to encode one roster ID.
int id_bits(std::uint32_t n_max) noexcept;

// Current size of node i's packet: |P_i| ceil(log2 n_max) bits, plus 2V per
// entry in topology mode.
std::int64_t packet_bits(const SimState& state, NodeId i);

// Coarse closed-form bound for a full topology packet: 2 V n ceil(log2 n_max).
std::int64_t topology_bound_bits(std::uint32_t n, std::uint32_t n_max, int coord_bits) noexcept;

std::vector<NodeId> discovered_neighbors(const SimState& state, NodeId i);

// Round trace: one CSV row per (round, node) with packet size, f, and whether
// the node broadcast in that round.
void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, const SimState& state);

}  // namespace cardest
