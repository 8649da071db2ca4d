#include <cmath>

#include "doctest.h"

#include "cardest/analysis.hpp"
#include "cardest/estimation.hpp"

using namespace cardest;

// The closed-form variance treats each of the N roster slots as an
// independent Bernoulli(n alpha). Here it is compared against the spread of
// the t0 estimator produced by the full simulator at the reference scale.
TEST_CASE("t0 estimator variance from simulation matches the closed form") {
  TrialConfig cfg;
  cfg.rounds = 0;
  cfg.queried = 30;
  cfg.trials = 2000;
  cfg.base_seed = 314;
  const auto res = run_trials(cfg);
  const double simulated = res.n_hat.stddev * res.n_hat.stddev;
  const double predicted = estimator_variance(cfg.n, cfg.n_max, alpha0(cfg.queried, cfg.n_max));
  MESSAGE("simulated variance " << simulated << ", closed form " << predicted);
  CHECK(std::abs(simulated - predicted) / predicted <= 0.10);
}
