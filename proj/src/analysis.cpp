#include "cardest/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace cardest {

namespace {

constexpr double kZ95 = 1.959963984540054;

// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index writes
// only its own output slot, so the reduction afterwards is order-independent.
template <typename Body>
void for_each_index(int count, unsigned jobs, Body&& body) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(count));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Trial {
  std::shared_ptr<const Network> net;
  SimState state;
  Rng protocol_rng;
  std::vector<NodeId> order;  // query permutation of the full roster
};

Trial start_trial(const TrialConfig& cfg, int index) {
  const std::uint64_t seed = cfg.trial_seed(index);
  auto net = std::make_shared<const Network>(
      cfg.require_connected ? generate_connected_network(cfg.n, cfg.n_max, cfg.field, seed)
                            : generate_network(cfg.n, cfg.n_max, cfg.field, seed));
  SimState state = init(net, cfg.protocol);
  Rng query_rng(derive_seed(seed, Stream::query));
  auto order = sample_roster(cfg.n_max, cfg.n_max, query_rng);
  return Trial{std::move(net), std::move(state), Rng(derive_seed(seed, Stream::protocol)), std::move(order)};
}

EstimateParams params_for(const TrialConfig& cfg, int k) {
  EstimateParams p;
  p.k = k;
  p.n_max = cfg.n_max;
  p.field = cfg.field;
  p.f = cfg.protocol.f_initial;
  p.q = cfg.protocol.erasure.constant_value();
  return p;
}

TrialRecord make_record(const TrialConfig& cfg, int index, int k, int round, std::size_t z) {
  QueryResult qr;
  qr.z_count = z;
  qr.round = round;
  const Regime regime = regime_for_round(round);
  const auto rep = estimate_size(qr, regime, params_for(cfg, k));
  TrialRecord rec;
  rec.seed = cfg.trial_seed(index);
  rec.z_count = z;
  rec.n_hat = rep.n_hat;
  rec.alpha_product = rep.alpha_product;
  rec.regime = regime;
  rec.coverage = static_cast<double>(z) / cfg.n;
  return rec;
}

SweepResult aggregate(const TrialConfig& cfg, int k, std::vector<TrialRecord> records) {
  SweepResult r;
  r.n = cfg.n;
  r.n_max = cfg.n_max;
  r.queried = k;
  r.rounds = cfg.rounds;
  r.f_initial = cfg.protocol.f_initial;
  r.q = cfg.protocol.erasure.constant_value();
  r.trials = static_cast<int>(records.size());
  std::vector<double> z, nh, cov;
  z.reserve(records.size());
  nh.reserve(records.size());
  cov.reserve(records.size());
  for (const auto& rec : records) {
    z.push_back(static_cast<double>(rec.z_count));
    nh.push_back(rec.n_hat);
    cov.push_back(rec.coverage);
  }
  r.z = summarize(z);
  r.n_hat = summarize(nh);
  r.coverage = summarize(cov);
  r.per_trial = std::move(records);
  return r;
}

bool meets(CoverageMetric metric, double threshold, std::size_t z, double n_hat, double n) {
  if (metric == CoverageMetric::count) return static_cast<double>(z) / n >= threshold;
  return std::abs(n_hat - n) / n <= 1.0 - threshold;
}

}  // namespace

void TrialConfig::validate() const {
  field.validate();
  protocol.validate();
  if (n < 1 || n > n_max) throw InvalidConfig("need 1 <= n <= n_max");
  if (rounds < 0) throw InvalidConfig("rounds must be non-negative");
  if (queried < 1 || static_cast<std::uint32_t>(queried) > n_max) throw InvalidConfig("need 1 <= K <= n_max");
  if (trials < 1) throw InvalidConfig("trials must be at least 1");
}

double Summary::std_error() const noexcept {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : stddev / std::sqrt(static_cast<double>(count));
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) {
    s.mean = s.stddev = s.ci_lo = s.ci_hi = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  // Welford, in index order.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.stddev = xs.size() > 1 ? std::sqrt(m2 / static_cast<double>(xs.size() - 1)) : 0.0;
  const double half = kZ95 * s.std_error();
  s.ci_lo = mean - half;
  s.ci_hi = mean + half;
  return s;
}

SweepResult run_trials(const TrialConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  for_each_index(cfg.trials, cfg.jobs, [&](int i) {
    Trial t = start_trial(cfg, i);
    for (int r = 0; r < cfg.rounds; ++r) advance(t.state, t.protocol_rng);
    const auto qr = query_nodes(t.state, std::span(t.order).first(static_cast<std::size_t>(cfg.queried)));
    records[static_cast<std::size_t>(i)] = make_record(cfg, i, cfg.queried, cfg.rounds, qr.z_count);
  });
  return aggregate(cfg, cfg.queried, std::move(records));
}

TrialRun run_single_trial(const TrialConfig& cfg, int index) {
  cfg.validate();
  Trial t = start_trial(cfg, index);
  for (int r = 0; r < cfg.rounds; ++r) advance(t.state, t.protocol_rng);
  auto qr = query_nodes(t.state, std::span(t.order).first(static_cast<std::size_t>(cfg.queried)));
  return TrialRun{t.net, std::move(t.state), std::move(qr)};
}

void trace_trial(const TrialConfig& cfg, int index, std::ostream& out) {
  cfg.validate();
  Trial t = start_trial(cfg, index);
  write_trace_header(out);
  write_trace_rows(out, t.state);
  for (int r = 0; r < cfg.rounds; ++r) {
    advance(t.state, t.protocol_rng);
    write_trace_rows(out, t.state);
  }
}

std::vector<std::vector<std::vector<std::uint32_t>>> coverage_curves(const TrialConfig& cfg,
                                                                     std::span<const int> rounds) {
  cfg.validate();
  for (int r : rounds) {
    if (r < 0) throw InvalidArgument("rounds must be non-negative");
  }
  const int last = rounds.empty() ? 0 : *std::max_element(rounds.begin(), rounds.end());
  std::vector<std::vector<std::vector<std::uint32_t>>> out(static_cast<std::size_t>(cfg.trials));
  for_each_index(cfg.trials, cfg.jobs, [&](int i) {
    Trial t = start_trial(cfg, i);
    auto& mine = out[static_cast<std::size_t>(i)];
    mine.resize(rounds.size());
    for (int r = 0; r <= last; ++r) {
      if (r > 0) advance(t.state, t.protocol_rng);
      std::vector<std::uint32_t> curve;
      for (std::size_t a = 0; a < rounds.size(); ++a) {
        if (rounds[a] != r) continue;
        if (curve.empty()) curve = coverage_curve(t.state, t.order);
        mine[a] = curve;
      }
    }
  });
  return out;
}

std::vector<SweepResult> sweep_queried_vs_estimated(const TrialConfig& base, std::span<const int> k_grid,
                                                    std::span<const TimeFPair> combos) {
  std::vector<SweepResult> out;
  for (const auto& combo : combos) {
    TrialConfig cfg = base;
    cfg.rounds = combo.rounds;
    cfg.protocol.f_initial = combo.f_initial;
    const std::array<int, 1> rounds{combo.rounds};
    const auto curves = coverage_curves(cfg, rounds);
    for (int k : k_grid) {
      if (k < 1 || static_cast<std::uint32_t>(k) > cfg.n_max) throw InvalidArgument("K outside [1, n_max]");
      std::vector<TrialRecord> recs;
      recs.reserve(curves.size());
      for (std::size_t i = 0; i < curves.size(); ++i) {
        recs.push_back(make_record(cfg, static_cast<int>(i), k, combo.rounds,
                                   curves[i][0][static_cast<std::size_t>(k - 1)]));
      }
      cfg.queried = k;
      out.push_back(aggregate(cfg, k, std::move(recs)));
    }
  }
  return out;
}

std::vector<TimeToCoverage> time_to_coverage(const TrialConfig& base, double threshold,
                                             std::span<const double> f_grid, std::span<const int> k_grid,
                                             int round_cap, CoverageMetric metric) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  if (round_cap < 0) throw InvalidArgument("round cap must be non-negative");
  for (int k : k_grid) {
    if (k < 1 || static_cast<std::uint32_t>(k) > base.n_max) throw InvalidArgument("K outside [1, n_max]");
  }
  std::vector<TimeToCoverage> out;
  for (double f : f_grid) {
    TrialConfig cfg = base;
    cfg.protocol.f_initial = f;
    cfg.validate();
    // hits[trial][k index]
    std::vector<std::vector<std::optional<int>>> hits(static_cast<std::size_t>(cfg.trials),
                                                      std::vector<std::optional<int>>(k_grid.size()));
    for_each_index(cfg.trials, cfg.jobs, [&](int i) {
      Trial t = start_trial(cfg, i);
      auto& mine = hits[static_cast<std::size_t>(i)];
      std::size_t pending = k_grid.size();
      for (int r = 0; r <= round_cap && pending > 0; ++r) {
        if (r > 0) advance(t.state, t.protocol_rng);
        const auto curve = coverage_curve(t.state, t.order);
        for (std::size_t a = 0; a < k_grid.size(); ++a) {
          if (mine[a]) continue;
          const int k = k_grid[a];
          const std::size_t z = curve[static_cast<std::size_t>(k - 1)];
          double n_hat = 0.0;
          if (metric == CoverageMetric::estimate) n_hat = make_record(cfg, i, k, r, z).n_hat;
          if (meets(metric, threshold, z, n_hat, cfg.n)) {
            mine[a] = r;
            --pending;
          }
        }
      }
    });
    for (std::size_t a = 0; a < k_grid.size(); ++a) {
      TimeToCoverage res;
      res.f_initial = f;
      res.queried = k_grid[a];
      res.threshold = threshold;
      res.round_cap = round_cap;
      res.trials = cfg.trials;
      std::vector<double> times;
      for (const auto& h : hits) {
        res.per_trial.push_back(h[a]);
        if (h[a]) times.push_back(*h[a]); else ++res.censored;
      }
      res.censored_fraction = static_cast<double>(res.censored) / cfg.trials;
      res.time = summarize(times);
      out.push_back(std::move(res));
    }
  }
  return out;
}

std::vector<RequiredQueries> min_queried_for_coverage(const TrialConfig& base, double threshold,
                                                      std::span<const GridPoint> grid, CoverageMetric metric) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must lie in (0, 1]");
  std::vector<RequiredQueries> out;
  for (const auto& point : grid) {
    TrialConfig cfg = base;
    cfg.rounds = point.rounds;
    cfg.protocol.f_initial = point.f_initial;
    cfg.protocol.erasure = ErasureRule::constant(point.q);
    const std::array<int, 1> rounds{point.rounds};
    const auto curves = coverage_curves(cfg, rounds);

    // score[K-1]: mean coverage (count) or mean relative error (estimate).
    std::vector<double> score(cfg.n_max, 0.0);
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const auto& curve = curves[i][0];
      for (std::uint32_t k = 1; k <= cfg.n_max; ++k) {
        const std::size_t z = curve[k - 1];
        if (metric == CoverageMetric::count) {
          score[k - 1] += static_cast<double>(z) / cfg.n;
        } else {
          const double n_hat = make_record(cfg, static_cast<int>(i), static_cast<int>(k), point.rounds, z).n_hat;
          score[k - 1] += std::abs(n_hat - cfg.n) / cfg.n;
        }
      }
    }
    for (auto& s : score) s /= static_cast<double>(curves.size());

    RequiredQueries res;
    res.point = point;
    res.threshold = threshold;
    res.trials = cfg.trials;
    for (std::size_t k = 1; k < score.size(); ++k) {
      const bool ok = metric == CoverageMetric::count ? score[k] >= score[k - 1] : score[k] <= score[k - 1];
      if (!ok) res.monotone = false;
    }
    // Linear scan over the exact mean curve.
    for (std::uint32_t k = 1; k <= cfg.n_max; ++k) {
      const double s = score[k - 1];
      const bool ok = metric == CoverageMetric::count ? s >= threshold : s <= 1.0 - threshold;
      if (ok) {
        res.k = static_cast<int>(k);
        res.coverage_at_k = s;
        break;
      }
    }
    out.push_back(res);
  }
  return out;
}

OutcomeSpaceTooLarge::OutcomeSpaceTooLarge(std::uint64_t at_least, std::uint64_t limit)
    : InvalidArgument("outcome space has at least " + std::to_string(at_least) + " outcomes (limit " +
                      std::to_string(limit) + ")"),
      at_least_(at_least) {}

namespace {

// Direct transcription of the round rules over bitmask packets, used as an
// oracle. Only membership matters for Z~, so packet order is not tracked.
class Enumerator {
 public:
  static constexpr int kMaxNodes = 5;

  Enumerator(const Network& net, const ProtocolConfig& cfg, int rounds, int k, std::uint64_t limit)
      : rounds_(rounds), k_(k), limit_(limit), n_max_(net.n_max()) {
    for (NodeId id : net.alive()) alive_.push_back(index_of(id));
    const auto n = alive_.size();
    std::array<int, 8> slot{};
    slot.fill(-1);
    for (std::size_t s = 0; s < n; ++s) slot[alive_[s]] = static_cast<int>(s);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<int> adj;
      for (NodeId j : net.neighbors(node_id(alive_[s]))) adj.push_back(slot[index_of(j)]);
      adjacency_.push_back(adj);
      q_.push_back(cfg.erasure.for_node(node_id(alive_[s])));
    }
    f_initial_ = cfg.f_initial;

    // All K-subsets of the roster as masks.
    for (std::uint32_t m = 0; m < (1U << n_max_); ++m) {
      if (std::popcount(m) == k_) subsets_.push_back(m);
    }
  }

  ExactMoments solve() {
    State s;
    for (std::size_t a = 0; a < alive_.size(); ++a) {
      s.mask[a] = 1U << alive_[a];
      s.f[a] = f_initial_;
    }
    play_round(0, s, 1.0);
    ExactMoments m;
    m.mean = sum1_;
    m.second_moment = sum2_;
    m.variance = std::max(0.0, sum2_ - sum1_ * sum1_);
    m.outcomes = outcomes_;
    return m;
  }

 private:
  struct State {
    std::array<std::uint32_t, kMaxNodes> mask{};
    std::array<double, kMaxNodes> f{};
    std::uint32_t tx = 0;  // slots that broadcast last round
  };

  void play_round(int done, const State& s, double prob) {
    if (done == rounds_) {
      leaf(s, prob);
      return;
    }
    std::vector<std::pair<int, int>> pairs;  // (receiver, sender), receiver-major, ascending
    for (std::size_t i = 0; i < alive_.size(); ++i) {
      for (int j : adjacency_[i]) {
        if ((s.tx >> j) & 1U) pairs.emplace_back(static_cast<int>(i), j);
      }
    }
    deliver(done, pairs, 0, s.mask, s, prob);
  }

  void deliver(int done, const std::vector<std::pair<int, int>>& pairs, std::size_t idx,
               const std::array<std::uint32_t, kMaxNodes>& sent, const State& s, double prob) {
    if (idx == pairs.size()) {
      State next = s;
      next.tx = 0;
      transmit(done, 0, next, prob);
      return;
    }
    const auto [i, j] = pairs[idx];
    const double heard = 1.0 - q_[static_cast<std::size_t>(i)];
    if (heard > 0.0) {
      State t = s;
      if ((sent[static_cast<std::size_t>(j)] & ~t.mask[static_cast<std::size_t>(i)]) != 0) {
        t.mask[static_cast<std::size_t>(i)] |= sent[static_cast<std::size_t>(j)];
        t.f[static_cast<std::size_t>(i)] = 0.5 * (t.f[static_cast<std::size_t>(i)] + 1.0);
      }
      deliver(done, pairs, idx + 1, sent, t, prob * heard);
    }
    if (heard < 1.0) deliver(done, pairs, idx + 1, sent, s, prob * (1.0 - heard));
  }

  void transmit(int done, std::size_t slot, const State& s, double prob) {
    if (slot == alive_.size()) {
      play_round(done + 1, s, prob);
      return;
    }
    const double p = s.f[slot];
    if (p > 0.0) {
      State t = s;
      t.tx |= 1U << slot;
      t.f[slot] = f_initial_;
      transmit(done, slot + 1, t, prob * p);
    }
    if (p < 1.0) transmit(done, slot + 1, s, prob * (1.0 - p));
  }

  void leaf(const State& s, double prob) {
    outcomes_ += subsets_.size();
    if (outcomes_ > limit_) throw OutcomeSpaceTooLarge(outcomes_, limit_);
    double z1 = 0.0, z2 = 0.0;
    for (std::uint32_t subset : subsets_) {
      std::uint32_t known = 0;
      for (std::size_t a = 0; a < alive_.size(); ++a) {
        if ((subset >> alive_[a]) & 1U) known |= s.mask[a];
      }
      const double z = std::popcount(known);
      z1 += z;
      z2 += z * z;
    }
    const double c = static_cast<double>(subsets_.size());
    sum1_ += prob * z1 / c;
    sum2_ += prob * z2 / c;
  }

  int rounds_;
  int k_;
  std::uint64_t limit_;
  std::uint32_t n_max_;
  double f_initial_ = 0.0;
  std::vector<std::uint32_t> alive_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<double> q_;
  std::vector<std::uint32_t> subsets_;
  std::uint64_t outcomes_ = 0;
  double sum1_ = 0.0;
  double sum2_ = 0.0;
};

}  // namespace

ExactMoments exhaustive_expectation(const Network& net, const ProtocolConfig& cfg, int rounds, int k,
                                    std::uint64_t limit) {
  cfg.validate();
  if (net.n_max() > static_cast<std::uint32_t>(Enumerator::kMaxNodes)) {
    throw InvalidArgument("exhaustive enumeration needs n_max <= 5");
  }
  if (rounds < 0 || rounds > 2) throw InvalidArgument("exhaustive enumeration needs 0 <= rounds <= 2");
  if (k < 1 || static_cast<std::uint32_t>(k) > net.n_max()) throw InvalidArgument("K outside [1, n_max]");
  return Enumerator(net, cfg, rounds, k, limit).solve();
}

MonteCarloMoments monte_carlo_expectation(const Network& net, const ProtocolConfig& cfg, int rounds, int k,
                                          int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  auto shared = std::make_shared<const Network>(net);
  const SimState start = init(shared, cfg);
  std::vector<double> zs;
  zs.reserve(static_cast<std::size_t>(trials));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    Rng proto(derive_seed(s, Stream::protocol));
    Rng qrng(derive_seed(s, Stream::query));
    SimState st = run(start, rounds, proto);
    zs.push_back(static_cast<double>(query(st, k, qrng).z_count));
  }
  const Summary sm = summarize(zs);
  return MonteCarloMoments{sm.mean, sm.stddev * sm.stddev, trials};
}

AlphaProductEstimate empirical_alpha_product(const TrialConfig& cfg) {
  if (cfg.trials < 500) throw InvalidArgument("empirical alpha product needs at least 500 trials");
  const auto res = run_trials(cfg);
  const double scale = static_cast<double>(cfg.n_max) * cfg.n;
  return AlphaProductEstimate{res.z.mean / scale, res.z.std_error() / scale, res.trials};
}

std::vector<double> ball_increment_means(std::uint32_t n, std::uint32_t n_max, const FieldConfig& field,
                                         int networks, std::uint64_t seed, int t_max) {
  if (networks < 1) throw InvalidArgument("need at least one network");
  if (t_max < 1) throw InvalidArgument("t_max must be at least 1");
  std::vector<double> sums(static_cast<std::size_t>(t_max), 0.0);
  std::uint64_t samples = 0;
  for (int g = 0; g < networks; ++g) {
    const Network net = generate_network(n, n_max, field, seed + static_cast<std::uint64_t>(g));
    for (NodeId i : net.alive()) {
      const auto dist = hop_distances(net, i);
      for (int d : dist) {
        if (d >= 1 && d <= t_max) sums[static_cast<std::size_t>(d - 1)] += 1.0;
      }
      ++samples;
    }
  }
  for (auto& s : sums) s /= static_cast<double>(samples);
  return sums;
}

}  // namespace cardest
