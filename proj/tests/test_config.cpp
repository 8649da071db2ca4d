#include "doctest.h"

#include "cardest/config.hpp"
#include "cardest/errors.hpp"

using namespace cardest;

TEST_CASE("defaults are the reference experiment") {
  const RunConfig c;
  CHECK(c.n == 300);
  CHECK(c.n_max == 350);
  CHECK(c.radius == 0.1);
  CHECK(c.erasure == 0.1);
  CHECK_NOTHROW(c.validate());
  const TrialConfig t = c.to_trial_config(4);
  CHECK(t.jobs == 4);
  CHECK(t.protocol.erasure.constant_value() == 0.1);
}

TEST_CASE("settings") {
  RunConfig c;
  apply_setting(c, "distance_mode", "toroidal");
  apply_setting(c, "topology", " yes ");
  apply_setting(c, "coverage_metric", "estimate");
  CHECK(c.distance_mode == DistanceMode::toroidal);
  CHECK(c.topology);
  CHECK(c.coverage_metric == CoverageMetric::estimate);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), InvalidConfig);
  CHECK_THROWS_AS(apply_setting(c, "n", "3x"), InvalidConfig);
  CHECK_THROWS_AS(apply_setting(c, "topology", "maybe"), InvalidConfig);
}

TEST_CASE("config text") {
  RunConfig c;
  apply_config_text(c, "# comment\n\nn = 100   # trailing\nn_max=120\r\nf_initial=0.25\n");
  CHECK(c.n == 100);
  CHECK(c.n_max == 120);
  CHECK(c.f_initial == 0.25);
  CHECK_THROWS_AS(apply_config_text(c, "n 100\n"), InvalidConfig);

  RunConfig round_trip;
  apply_config_text(round_trip, to_config_text(c));
  CHECK(to_config_text(round_trip) == to_config_text(c));
  for (const auto& key : config_keys()) CHECK(to_config_text(c).find(key + "=") != std::string::npos);
}

TEST_CASE("validation") {
  RunConfig c;
  c.n = 400;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = RunConfig{};
  c.coverage_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = RunConfig{};
  c.erasure = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}
