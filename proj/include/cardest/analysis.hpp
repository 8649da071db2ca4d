#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardest/errors.hpp"
#include "cardest/estimation.hpp"
#include "cardest/geometry.hpp"
#include "cardest/protocol.hpp"

namespace cardest {

// One Monte Carlo experiment: `trials` independent runs of
// generate -> init -> run `rounds` -> query `queried`.
// Trial i uses seed base_seed + i, split into network/protocol/query streams.
struct TrialConfig {
  std::uint32_t n = 300;
  std::uint32_t n_max = 350;
  FieldConfig field{};
  ProtocolConfig protocol{};
  int rounds = 6;
  int queried = 35;
  int trials = 500;
  std::uint64_t base_seed = 1;
  bool require_connected = false;
  // Worker threads; results do not depend on this.
  unsigned jobs = 1;

  void validate() const;
  std::uint64_t trial_seed(int index) const noexcept { return base_seed + static_cast<std::uint64_t>(index); }
};

// "95% estimation": count compares Z~/n with the threshold; estimate requires
// |n~ - n| / n <= 1 - threshold.
enum class CoverageMetric { count, estimate };

// Sample statistics with a 95% normal confidence interval for the mean.
struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t count = 0;

  double std_error() const noexcept;
};

Summary summarize(std::span<const double> xs);

struct TrialRecord {
  std::uint64_t seed = 0;
  std::size_t z_count = 0;
  double n_hat = 0.0;
  double alpha_product = 0.0;
  Regime regime = Regime::t0;
  double coverage = 0.0;
};

struct SweepResult {
  std::uint32_t n = 0;
  std::uint32_t n_max = 0;
  int queried = 0;
  int rounds = 0;
  double f_initial = 0.0;
  double q = 0.0;
  int trials = 0;
  Summary z;
  Summary n_hat;
  Summary coverage;
  std::vector<TrialRecord> per_trial;
};

SweepResult run_trials(const TrialConfig& cfg);

// Everything produced by one end-to-end trial.
struct TrialRun {
  std::shared_ptr<const Network> net;
  SimState state;
  QueryResult query;
};

TrialRun run_single_trial(const TrialConfig& cfg, int index);

// Replays trial `index` and writes its round trace (rounds 0..cfg.rounds).
void trace_trial(const TrialConfig& cfg, int index, std::ostream& out);

// Per-trial Z~ for every K in 1..n_max at each requested round, on one
// trajectory and one query permutation per trial. Indexed [trial][round][K-1].
std::vector<std::vector<std::vector<std::uint32_t>>> coverage_curves(const TrialConfig& cfg,
                                                                     std::span<const int> rounds);

struct TimeFPair {
  int rounds = 0;
  double f_initial = 0.5;
};

// Counting output as a function of K for each (t, F) combination. One result
// per (combination, K), combination-major.
std::vector<SweepResult> sweep_queried_vs_estimated(const TrialConfig& base, std::span<const int> k_grid,
                                                    std::span<const TimeFPair> combos);

struct TimeToCoverage {
  double f_initial = 0.0;
  int queried = 0;
  double threshold = 0.0;
  int round_cap = 0;
  int trials = 0;
  std::size_t censored = 0;
  double censored_fraction = 0.0;
  // Over uncensored trials only; mean is NaN when every trial is censored.
  Summary time;
  // First round meeting the threshold, or nullopt if the cap was reached.
  std::vector<std::optional<int>> per_trial;
};

// One result per (F, K), F-major. Each trial queries a fixed ID set every
// round of one trajectory.
std::vector<TimeToCoverage> time_to_coverage(const TrialConfig& base, double threshold,
                                             std::span<const double> f_grid, std::span<const int> k_grid,
                                             int round_cap = 50, CoverageMetric metric = CoverageMetric::count);

struct GridPoint {
  int rounds = 0;
  double f_initial = 0.5;
  double q = 0.1;
};

struct RequiredQueries {
  GridPoint point;
  double threshold = 0.0;
  int trials = 0;
  // Smallest K whose mean coverage meets the threshold; nullopt if even
  // K = n_max does not (censored).
  std::optional<int> k;
  double coverage_at_k = 0.0;
  // Whether the mean coverage curve was non-decreasing in K.
  bool monotone = true;
};

std::vector<RequiredQueries> min_queried_for_coverage(const TrialConfig& base, double threshold,
                                                      std::span<const GridPoint> grid,
                                                      CoverageMetric metric = CoverageMetric::count);

class OutcomeSpaceTooLarge : public InvalidArgument {
 public:
  OutcomeSpaceTooLarge(std::uint64_t at_least, std::uint64_t limit);
  std::uint64_t at_least() const noexcept { return at_least_; }

 private:
  std::uint64_t at_least_;
};

struct ExactMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  std::uint64_t outcomes = 0;
};

// Exact E[Z~] and Var[Z~] on a fixed tiny network by enumerating every
// transmit draw, erasure draw and query subset with its probability.
// Requires n_max <= 5 and rounds <= 2. Throws OutcomeSpaceTooLarge when the
// number of positive-probability outcomes exceeds `limit`.
ExactMoments exhaustive_expectation(const Network& net, const ProtocolConfig& cfg, int rounds, int k,
                                    std::uint64_t limit = 1'000'000);

struct MonteCarloMoments {
  double mean = 0.0;
  double variance = 0.0;
  int trials = 0;
};

// The simulator's estimate of the same quantity on the same fixed network.
MonteCarloMoments monte_carlo_expectation(const Network& net, const ProtocolConfig& cfg, int rounds, int k,
                                          int trials, std::uint64_t seed);

struct AlphaProductEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

// mean(Z~(t)) / (n_max n) over cfg.trials (>= 500) trials at t = cfg.rounds.
AlphaProductEstimate empirical_alpha_product(const TrialConfig& cfg);

// Mean |B_t \ B_{t-1}| over alive nodes and `networks` generated networks,
// for t = 1..t_max.
std::vector<double> ball_increment_means(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                                         int networks, std::uint64_t seed, int t_max);

}  // namespace cardest
