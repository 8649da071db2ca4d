#include "cardest/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cardest/errors.hpp"

namespace cardest {

namespace {

void check_k(int k, std::uint32_t n_max) {
  if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
  if (k < 1 || static_cast<std::uint32_t>(k) > n_max) {
    throw InvalidArgument("K must lie in [1, n_max], got " + std::to_string(k));
  }
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

std::vector<NodeId> sample_roster(std::uint32_t n_max, std::uint32_t k, Rng& rng) {
  if (k > n_max) throw InvalidArgument("sample larger than roster");
  std::vector<std::uint32_t> roster(n_max);
  for (std::uint32_t i = 0; i < n_max; ++i) roster[i] = i;
  std::vector<NodeId> out;
  out.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(n_max - i));
    std::swap(roster[i], roster[j]);
    out.push_back(node_id(roster[i]));
  }
  return out;
}

QueryResult query(const SimState& state, int k, Rng& rng) {
  const auto n_max = state.network().n_max();
  check_k(k, n_max);
  const auto ids = sample_roster(n_max, static_cast<std::uint32_t>(k), rng);
  return query_nodes(state, ids);
}

QueryResult query_nodes(const SimState& state, std::span<const NodeId> queried) {
  const Network& net = state.network();
  QueryResult qr;
  qr.queried.assign(queried.begin(), queried.end());
  qr.round = state.round();
  if (state.topology_mode()) qr.coords.emplace();

  IdSet acc(net.n_max());
  for (NodeId id : queried) {
    if (index_of(id) >= net.n_max()) throw InvalidArgument("queried ID outside the roster");
    if (!net.is_alive(id)) continue;  // dead: empty packet
    const NodeState& ns = state.node(id);
    acc.unite(ns.members);
    if (qr.coords) qr.coords->insert(ns.coords.begin(), ns.coords.end());
  }
  acc.for_each([&](std::size_t i) { qr.union_packet.push_back(node_id(static_cast<std::uint32_t>(i))); });
  qr.z_count = qr.union_packet.size();
  return qr;
}

std::vector<std::uint32_t> coverage_curve(const SimState& state, std::span<const NodeId> order) {
  const Network& net = state.network();
  std::vector<std::uint32_t> curve;
  curve.reserve(order.size());
  IdSet acc(net.n_max());
  std::uint32_t z = 0;
  for (NodeId id : order) {
    if (net.is_alive(id)) {
      state.node(id).members.for_each([&](std::size_t i) {
        if (acc.insert(i)) ++z;
      });
    }
    curve.push_back(z);
  }
  return curve;
}

double alpha0(int k, std::uint32_t n_max) {
  check_k(k, n_max);
  const double nm = n_max;
  return k / (nm * nm);
}

double alpha1(int k, std::uint32_t n_max, const FieldConfig& field, double f, double q) {
  check_k(k, n_max);
  field.validate();
  check_probability(f, "f");
  if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("q must lie in [0, 1)");
  const double r2 = field.radius * field.radius;
  return 1.0 + (static_cast<double>(n_max) - k) / field.area() * std::numbers::pi * r2 * f * (1.0 - q);
}

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::t0: return "t0";
    case Regime::t1: return "t1";
    case Regime::t_infinity: return "t_infinity";
    case Regime::empirical: return "empirical";
  }
  return "unknown";
}

std::optional<Regime> parse_regime(std::string_view s) noexcept {
  for (Regime r : {Regime::t0, Regime::t1, Regime::t_infinity, Regime::empirical}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

bool regime_matches_round(Regime r, int round) noexcept {
  switch (r) {
    case Regime::t0: return round == 0 || round == 1;
    case Regime::t1: return round == 2;
    case Regime::t_infinity:
    case Regime::empirical: return round >= 0;
  }
  return false;
}

Regime regime_for_round(int round) noexcept {
  if (round <= 1) return Regime::t0;
  if (round == 2) return Regime::t1;
  return Regime::t_infinity;
}

EstimateReport estimate_size(const QueryResult& qr, Regime regime, const EstimateParams& p) {
  if (!regime_matches_round(regime, qr.round)) {
    throw InvalidArgument("regime " + std::string(to_string(regime)) + " does not apply at round " +
                          std::to_string(qr.round));
  }
  check_k(p.k, p.n_max);
  if (!qr.queried.empty() && qr.queried.size() != static_cast<std::size_t>(p.k)) {
    throw InvalidArgument("K does not match the number of queried nodes");
  }

  EstimateReport rep;
  rep.z_count = qr.z_count;
  rep.regime = regime;
  switch (regime) {
    case Regime::t0: rep.alpha_product = alpha0(p.k, p.n_max); break;
    case Regime::t1: rep.alpha_product = alpha0(p.k, p.n_max) * alpha1(p.k, p.n_max, p.field, p.f, p.q); break;
    case Regime::t_infinity: rep.alpha_product = 1.0 / p.n_max; break;
    case Regime::empirical:
      if (!p.alpha_product || !(*p.alpha_product > 0.0)) {
        throw InvalidArgument("empirical regime needs a positive calibrated alpha product");
      }
      rep.alpha_product = *p.alpha_product;
      break;
  }
  if (regime == Regime::t_infinity) {
    rep.n_hat = static_cast<double>(qr.z_count);
  } else {
    rep.n_hat = static_cast<double>(qr.z_count) / (p.n_max * rep.alpha_product);
  }
  return rep;
}

double max_bernoulli_param(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("need at least one probability");
  double none = 1.0;
  for (double p : probs) {
    check_probability(p, "probability");
    none *= 1.0 - p;
  }
  return 1.0 - none;
}

double blue_estimate(std::int64_t sum_x, std::int64_t big_n, double alpha) {
  if (big_n < 1) throw InvalidArgument("N must be at least 1");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (sum_x < 0 || sum_x > big_n) throw InvalidArgument("sum must lie in [0, N]");
  return static_cast<double>(sum_x) / (static_cast<double>(big_n) * alpha);
}

double estimator_variance(double n, double big_n, double alpha) {
  if (!(big_n >= 1.0)) throw InvalidArgument("N must be at least 1");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  const double p = n * alpha;
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("n * alpha must lie in [0, 1]");
  return n * (1.0 - p) / (big_n * alpha);
}

double fisher_information(double n, double big_n, double alpha) {
  if (!(big_n >= 1.0)) throw InvalidArgument("N must be at least 1");
  if (!(n >= 1.0)) throw InvalidArgument("n must be at least 1");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  const double p = n * alpha;
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("n * alpha must lie strictly inside (0, 1)");
  return big_n * alpha / (n * (1.0 - p));
}

Topology reconstruct_topology(const QueryResult& qr, const FieldConfig& field) {
  if (!qr.coords) throw InvalidState("query result carries no coordinates (topology mode off)");
  Topology g;
  g.vertices = qr.union_packet;
  std::vector<Point> pos;
  pos.reserve(g.vertices.size());
  for (NodeId v : g.vertices) {
    auto it = qr.coords->find(v);
    if (it == qr.coords->end()) {
      throw InvalidState("missing coordinates for node " + std::to_string(index_of(v)));
    }
    pos.push_back(it->second);
  }
  for (std::size_t a = 0; a < g.vertices.size(); ++a) {
    for (std::size_t b = a + 1; b < g.vertices.size(); ++b) {
      if (distance(pos[a], pos[b], field) <= field.radius) g.edges.emplace_back(g.vertices[a], g.vertices[b]);
    }
  }
  return g;
}

Topology true_topology(const Network& net) {
  Topology g;
  g.vertices.assign(net.alive().begin(), net.alive().end());
  for (NodeId a : net.alive()) {
    for (NodeId b : net.neighbors(a)) {
      if (a < b) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

TopologyComparison compare_topology(const Topology& found, const Network& truth) {
  const Topology t = true_topology(truth);
  TopologyComparison c;
  c.true_vertices = t.vertices.size();
  c.true_edges = t.edges.size();
  c.found_vertices = found.vertices.size();
  c.found_edges = found.edges.size();

  std::size_t hit_v = 0;
  for (NodeId v : found.vertices) {
    if (std::binary_search(t.vertices.begin(), t.vertices.end(), v)) ++hit_v; else ++c.false_vertices;
  }
  std::size_t hit_e = 0;
  for (const auto& e : found.edges) {
    if (std::binary_search(t.edges.begin(), t.edges.end(), e)) ++hit_e; else ++c.false_edges;
  }
  c.vertex_recall = c.true_vertices == 0 ? 1.0 : static_cast<double>(hit_v) / c.true_vertices;
  c.edge_recall = c.true_edges == 0 ? 1.0 : static_cast<double>(hit_e) / c.true_edges;
  return c;
}

}  // namespace cardest
