#include "cardest/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <string>

#include "cardest/csv.hpp"
#include "cardest/errors.hpp"

namespace cardest {

namespace {

const double kBelowOne = std::nextafter(1.0, 0.0);

void check_q(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw InvalidConfig("erasure probability must lie in [0, 1)");
}

}  // namespace

ErasureRule ErasureRule::constant(double q) {
  ErasureRule r;
  r.constant_ = q;
  return r;
}

ErasureRule ErasureRule::per_node(std::map<NodeId, double> q, double fallback) {
  ErasureRule r;
  r.constant_ = fallback;
  r.per_node_ = std::move(q);
  return r;
}

double ErasureRule::for_node(NodeId id) const {
  if (auto it = per_node_.find(id); it != per_node_.end()) return it->second;
  return constant_;
}

void ErasureRule::validate() const {
  check_q(constant_);
  for (const auto& [id, q] : per_node_) check_q(q);
}

void ProtocolConfig::validate() const {
  if (!(f_initial > 0.0 && f_initial <= 1.0)) throw InvalidConfig("f_initial must lie in (0, 1]");
  erasure.validate();
  if (coord_bits < 1) throw InvalidConfig("coord_bits must be positive");
}

const NodeState& SimState::node(NodeId id) const {
  const auto i = index_of(id);
  if (i >= slot_.size() || slot_[i] < 0) {
    throw NotAlive("node " + std::to_string(i) + " is not alive");
  }
  return nodes_[static_cast<std::size_t>(slot_[i])];
}

bool operator==(const SimState& a, const SimState& b) {
  auto same_node = [](const NodeState& x, const NodeState& y) {
    return x.id == y.id && x.packet == y.packet && x.members == y.members && x.f == y.f &&
           x.f_initial == y.f_initial && x.q == y.q && x.discovered == y.discovered &&
           x.coords == y.coords;
  };
  return *a.net_ == *b.net_ && a.round_ == b.round_ && a.topology_mode_ == b.topology_mode_ &&
         a.transmitted_prev_ == b.transmitted_prev_ &&
         std::equal(a.nodes_.begin(), a.nodes_.end(), b.nodes_.begin(), b.nodes_.end(), same_node);
}

SimState init(std::shared_ptr<const Network> net, const ProtocolConfig& cfg) {
  if (!net) throw InvalidArgument("null network");
  cfg.validate();
  SimState s;
  s.net_ = std::move(net);
  s.topology_mode_ = cfg.topology_mode;
  s.coord_bits_ = cfg.coord_bits;
  const auto n_max = s.net_->n_max();
  s.slot_.assign(n_max, -1);
  s.nodes_.reserve(s.net_->size());
  for (NodeId id : s.net_->alive()) {
    NodeState ns;
    ns.id = id;
    ns.packet = {id};
    ns.members = IdSet(n_max);
    ns.members.insert(index_of(id));
    ns.f = cfg.f_initial;
    ns.f_initial = cfg.f_initial;
    ns.q = cfg.erasure.for_node(id);
    if (cfg.topology_mode) ns.coords.emplace(id, s.net_->position(id));
    s.slot_[index_of(id)] = static_cast<std::int32_t>(s.nodes_.size());
    s.nodes_.push_back(std::move(ns));
  }
  return s;
}

void advance(SimState& s, Rng& rng) {
  const Network& net = *s.net_;

  // What each transmitter sent: its packet at the end of last round.
  struct Sent {
    std::vector<NodeId> packet;
    IdSet members;
    std::map<NodeId, Point> coords;
  };
  std::vector<const Sent*> sent_by(net.n_max(), nullptr);
  std::vector<Sent> sent;
  sent.reserve(s.transmitted_prev_.size());
  for (NodeId j : s.transmitted_prev_) {
    const NodeState& src = s.node(j);
    sent.push_back(Sent{src.packet, src.members, src.coords});
  }
  for (std::size_t k = 0; k < sent.size(); ++k) sent_by[index_of(s.transmitted_prev_[k])] = &sent[k];

  for (NodeState& me : s.nodes_) {
    for (NodeId j : net.neighbors(me.id)) {
      const Sent* pkt = sent_by[index_of(j)];
      if (pkt == nullptr) continue;
      if (!rng.bernoulli(1.0 - me.q)) continue;

      auto pos = std::lower_bound(me.discovered.begin(), me.discovered.end(), j);
      if (pos == me.discovered.end() || *pos != j) me.discovered.insert(pos, j);

      if (pkt->members.is_subset_of(me.members)) continue;
      me.packet.pop_back();  // own ID, re-appended below
      for (NodeId k : pkt->packet) {
        if (me.members.insert(index_of(k))) {
          me.packet.push_back(k);
          if (s.topology_mode_) me.coords.emplace(k, pkt->coords.at(k));
        }
      }
      me.packet.push_back(me.id);
      me.f = 0.5 * (me.f + 1.0);
      // Rounding would otherwise reach 1.0 after ~53 consecutive halvings.
      if (me.f_initial < 1.0) me.f = std::min(me.f, kBelowOne);
    }
  }

  s.transmitted_prev_.clear();
  for (NodeState& me : s.nodes_) {
    if (rng.uniform01() < me.f) {
      s.transmitted_prev_.push_back(me.id);
      me.f = me.f_initial;
    }
  }
  ++s.round_;
}

SimState step(SimState state, Rng& rng) {
  advance(state, rng);
  return state;
}

SimState run(SimState state, int rounds, Rng& rng) {
  if (rounds < 0) throw InvalidArgument("rounds must be non-negative");
  for (int r = 0; r < rounds; ++r) advance(state, rng);
  return state;
}

int id_bits(std::uint32_t n_max) noexcept {
  return n_max <= 1 ? 0 : static_cast<int>(std::bit_width(n_max - 1));
}

std::int64_t packet_bits(const SimState& state, NodeId i) {
  const auto& ns = state.node(i);
  std::int64_t per_entry = id_bits(state.network().n_max());
  if (state.topology_mode()) per_entry += 2 * static_cast<std::int64_t>(state.coord_bits());
  return static_cast<std::int64_t>(ns.packet.size()) * per_entry;
}

std::int64_t topology_bound_bits(std::uint32_t n, std::uint32_t n_max, int coord_bits) noexcept {
  return 2 * static_cast<std::int64_t>(coord_bits) * n * id_bits(n_max);
}

std::vector<NodeId> discovered_neighbors(const SimState& state, NodeId i) {
  return state.node(i).discovered;
}

void write_trace_header(std::ostream& out) {
  csv::row(out, {"round", "node", "packet_size", "f", "transmitted"});
}

void write_trace_rows(std::ostream& out, const SimState& state) {
  const auto tx = state.transmitted_prev();
  const std::string round = csv::number(static_cast<std::int64_t>(state.round()));
  for (const NodeState& ns : state.nodes()) {
    const bool sent = std::binary_search(tx.begin(), tx.end(), ns.id);
    csv::row(out, {round, csv::number(static_cast<std::int64_t>(index_of(ns.id))),
                   csv::number(static_cast<std::int64_t>(ns.packet.size())), csv::number(ns.f),
                   sent ? "1" : "0"});
  }
}

}  // namespace cardest
