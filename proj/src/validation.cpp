#include "cardest/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "cardest/analysis.hpp"
#include "cardest/errors.hpp"
#include "cardest/estimation.hpp"

namespace cardest {

namespace {

TrialConfig reference_scale(std::uint64_t seed, unsigned jobs) {
  TrialConfig cfg;
  cfg.base_seed = seed;
  cfg.jobs = jobs;
  return cfg;
}

void t0_mean(const ValidationOptions& o, std::vector<CheckResult>& out) {
  TrialConfig cfg = reference_scale(o.seed, o.jobs);
  cfg.rounds = 0;
  cfg.queried = 30;
  cfg.trials = 2000;
  const auto res = run_trials(cfg);
  const double predicted = static_cast<double>(cfg.n) * cfg.queried / cfg.n_max;
  out.push_back({"t0_mean", res.z.mean, predicted, "3 standard errors",
                 std::abs(res.z.mean - predicted) <= 3.0 * res.z.std_error()});
}

void t1_mean(const ValidationOptions& o, std::vector<CheckResult>& out) {
  TrialConfig cfg = reference_scale(o.seed, o.jobs);
  cfg.field.mode = DistanceMode::toroidal;
  cfg.rounds = 2;  // first round in which broadcasts are delivered
  cfg.queried = 10;
  cfg.trials = 5000;
  cfg.protocol.f_initial = 0.5;
  cfg.protocol.erasure = ErasureRule::constant(0.1);
  const auto res = run_trials(cfg);
  const double a1 = o.alpha1_scale * alpha1(cfg.queried, cfg.n_max, cfg.field, 0.5, 0.1);
  const double predicted = static_cast<double>(cfg.n) * cfg.queried / cfg.n_max * a1;
  out.push_back({"t1_mean", res.z.mean, predicted, "20% relative",
                 std::abs(res.z.mean - predicted) <= 0.20 * predicted});
}

void ball_growth(const ValidationOptions& o, std::vector<CheckResult>& out) {
  FieldConfig field;
  field.mode = DistanceMode::toroidal;
  const auto means = ball_increment_means(300, 350, field, 200, o.seed, 3);
  for (int t = 1; t <= 3; ++t) {
    const double predicted = expected_ball_increment(300, field, t);
    const double m = means[static_cast<std::size_t>(t - 1)];
    out.push_back({"ball_growth_t" + std::to_string(t), m, predicted, "15% relative",
                   std::abs(m - predicted) <= 0.15 * predicted});
  }
}

void max_bernoulli(const ValidationOptions& o, std::vector<CheckResult>& out) {
  Rng rng(derive_seed(o.seed, Stream::protocol));
  double worst = 0.0;
  constexpr int kDraws = 100000;
  for (int v = 0; v < 20; ++v) {
    std::vector<double> p(1 + rng.below(6));
    for (auto& x : p) x = rng.uniform01();
    const double exact = max_bernoulli_param(p);
    int hits = 0;
    for (int d = 0; d < kDraws; ++d) {
      bool any = false;
      for (double pi : p) any = rng.bernoulli(pi) || any;
      hits += any ? 1 : 0;
    }
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-300) / kDraws);
    worst = std::max(worst, std::abs(hits / static_cast<double>(kDraws) - exact) / se);
  }
  out.push_back({"max_bernoulli", worst, 0.0, "worst |z| <= 4 over 20 vectors", worst <= 4.0});
}

void blue_unbiased(const ValidationOptions& o, std::vector<CheckResult>& out) {
  TrialConfig cfg = reference_scale(o.seed + 1, o.jobs);
  cfg.rounds = 0;
  cfg.queried = 30;
  cfg.trials = 2000;
  const auto res = run_trials(cfg);
  const double half = 2.5758293035489 * res.n_hat.std_error();
  out.push_back({"blue_unbiased", res.n_hat.mean, static_cast<double>(cfg.n), "99% CI of the mean",
                 std::abs(res.n_hat.mean - cfg.n) <= half});
}

void tiny_oracle(const ValidationOptions& o, std::vector<CheckResult>& out) {
  FieldConfig field;
  const Network net(3, field, {{node_id(0), {0.10, 0.10}}, {node_id(1), {0.15, 0.10}}, {node_id(2), {0.22, 0.10}}});
  ProtocolConfig cfg;
  cfg.f_initial = 0.5;
  cfg.erasure = ErasureRule::constant(0.2);
  const auto exact = exhaustive_expectation(net, cfg, 2, 1);
  const auto mc = monte_carlo_expectation(net, cfg, 2, 1, 100000, o.seed);
  const double se = std::sqrt(exact.variance / mc.trials);
  out.push_back({"tiny_oracle", mc.mean, exact.mean, "4 exact standard errors",
                 std::abs(mc.mean - exact.mean) <= 4.0 * se});
}

using CheckFn = void (*)(const ValidationOptions&, std::vector<CheckResult>&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks{
      {"t0_mean", t0_mean},           {"t1_mean", t1_mean},
      {"ball_growth", ball_growth},   {"max_bernoulli", max_bernoulli},
      {"blue_unbiased", blue_unbiased}, {"tiny_oracle", tiny_oracle},
  };
  return checks;
}

}  // namespace

std::vector<std::string> validation_check_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

std::vector<CheckResult> run_validation(const ValidationOptions& opts) {
  const auto names = validation_check_names();
  for (const auto& want : opts.only) {
    if (std::find(names.begin(), names.end(), want) == names.end()) {
      throw InvalidArgument("unknown validation check '" + want + "'");
    }
  }
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : registry()) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), name) == opts.only.end()) continue;
    fn(opts, out);
  }
  return out;
}

}  // namespace cardest
