#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cardest/geometry.hpp"
#include "cardest/protocol.hpp"
#include "cardest/rng.hpp"

namespace cardest {

// What the data collector sees after querying.
struct QueryResult {
  std::vector<NodeId> queried;       // in draw order
  std::vector<NodeId> union_packet;  // ascending
  std::size_t z_count = 0;           // |union_packet|
  int round = 0;
  std::optional<std::map<NodeId, Point>> coords;  // topology mode only
};

// First `k` entries of a uniform random permutation of [0, n_max). Prefixes
// are consistent: the K-sample is a subset of the (K+1)-sample for the same
// generator state, which gives common random numbers across K.
std::vector<NodeId> sample_roster(std::uint32_t n_max, std::uint32_t k, Rng& rng);

// Queries `k` IDs drawn uniformly without replacement from the full roster.
// Dead IDs contribute nothing. Throws InvalidArgument unless 1 <= k <= n_max.
QueryResult query(const SimState& state, int k, Rng& rng);

// Queries an explicit ID list (may include dead IDs).
QueryResult query_nodes(const SimState& state, std::span<const NodeId> queried);

// Z~ after querying each prefix of `order`: element k-1 is Z~ for the first k.
std::vector<std::uint32_t> coverage_curve(const SimState& state, std::span<const NodeId> order);

// K / n_max^2.
double alpha0(int k, std::uint32_t n_max);

// 1 + (n_max - K) pi R^2 f (1 - q) / (LW).
double alpha1(int k, std::uint32_t n_max, const FieldConfig& field, double f, double q);

enum class Regime { t0, t1, t_infinity, empirical };

std::string_view to_string(Regime r) noexcept;
std::optional<Regime> parse_regime(std::string_view s) noexcept;

// Regimes t0 and t1 model the knowledge held before any broadcast has been
// delivered and after exactly one delivery, respectively. Round 1 delivers
// nothing (no node has transmitted yet), so t0 covers rounds 0 and 1 and t1
// is round 2.
bool regime_matches_round(Regime r, int round) noexcept;
// Closed-form regime for a query round: t0, t1, else t_infinity.
Regime regime_for_round(int round) noexcept;

struct EstimateParams {
  int k = 0;
  std::uint32_t n_max = 0;
  FieldConfig field{};
  double f = 0.0;
  double q = 0.0;
  // Calibrated prod(alpha_k) for the empirical regime.
  std::optional<double> alpha_product;
};

struct EstimateReport {
  std::size_t z_count = 0;
  double alpha_product = 0.0;
  double n_hat = 0.0;
  Regime regime = Regime::t0;
};

// n~ = Z~ / (n_max * prod alpha). In t_infinity prod alpha = 1/n_max, so n~ = Z~.
// Throws InvalidArgument on a regime/round mismatch or missing calibration.
EstimateReport estimate_size(const QueryResult& qr, Regime regime, const EstimateParams& params);

// P(max X_i = 1) = 1 - prod(1 - p_i) for independent Bernoulli(p_i).
double max_bernoulli_param(std::span<const double> probs);

// sum_x / (N alpha).
double blue_estimate(std::int64_t sum_x, std::int64_t big_n, double alpha);

// n (1 - n alpha) / (N alpha).
double estimator_variance(double n, double big_n, double alpha);

// N alpha / (n (1 - n alpha)); requires 0 < n alpha < 1.
double fisher_information(double n, double big_n, double alpha);

struct Topology {
  std::vector<NodeId> vertices;                // ascending
  std::vector<std::pair<NodeId, NodeId>> edges;  // first < second, lexicographic
};

// Vertices are the union packet; an edge joins every pair whose reported
// coordinates are within the radius. Throws InvalidState without coordinates.
Topology reconstruct_topology(const QueryResult& qr, const FieldConfig& field);

// Alive graph of the network in the same form.
Topology true_topology(const Network& net);

struct TopologyComparison {
  std::size_t true_vertices = 0;
  std::size_t true_edges = 0;
  std::size_t found_vertices = 0;
  std::size_t found_edges = 0;
  std::size_t false_vertices = 0;
  std::size_t false_edges = 0;
  double vertex_recall = 0.0;
  double edge_recall = 0.0;
};

TopologyComparison compare_topology(const Topology& found, const Network& truth);

}  // namespace cardest
