#include "cardest/config.hpp"

#include <charconv>
#include <type_traits>
#include <sstream>

#include "cardest/csv.hpp"
#include "cardest/errors.hpp"

namespace cardest {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw InvalidConfig("bad value '" + std::string(v) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw InvalidConfig("bad boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace

TrialConfig RunConfig::to_trial_config(unsigned jobs) const {
  TrialConfig t;
  t.n = n;
  t.n_max = n_max;
  t.field = FieldConfig{length, width, radius, distance_mode};
  t.protocol.f_initial = f_initial;
  t.protocol.erasure = ErasureRule::constant(erasure);
  t.protocol.topology_mode = topology;
  t.protocol.coord_bits = coord_bits;
  t.rounds = rounds;
  t.queried = queried;
  t.trials = trials;
  t.base_seed = seed;
  t.jobs = jobs;
  return t;
}

void RunConfig::validate() const {
  to_trial_config().validate();
  if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
    throw InvalidConfig("coverage_threshold must lie in [0, 1]");
  }
  if (round_cap < 0) throw InvalidConfig("round_cap must be non-negative");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n",        "n_max",  "length",   "width",         "radius",   "f_initial",
      "erasure",  "rounds", "queried",  "trials",        "seed",     "distance_mode",
      "topology", "coord_bits", "coverage_threshold", "coverage_metric", "round_cap"};
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "n") c.n = parse_number<std::uint32_t>(key, v);
  else if (key == "n_max") c.n_max = parse_number<std::uint32_t>(key, v);
  else if (key == "length") c.length = parse_number<double>(key, v);
  else if (key == "width") c.width = parse_number<double>(key, v);
  else if (key == "radius") c.radius = parse_number<double>(key, v);
  else if (key == "f_initial") c.f_initial = parse_number<double>(key, v);
  else if (key == "erasure") c.erasure = parse_number<double>(key, v);
  else if (key == "rounds") c.rounds = parse_number<int>(key, v);
  else if (key == "queried") c.queried = parse_number<int>(key, v);
  else if (key == "trials") c.trials = parse_number<int>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "distance_mode") {
    if (v == "planar") c.distance_mode = DistanceMode::planar;
    else if (v == "toroidal") c.distance_mode = DistanceMode::toroidal;
    else throw InvalidConfig("distance_mode must be planar or toroidal");
  } else if (key == "topology") c.topology = parse_bool(key, v);
  else if (key == "coord_bits") c.coord_bits = parse_number<int>(key, v);
  else if (key == "coverage_threshold") c.coverage_threshold = parse_number<double>(key, v);
  else if (key == "coverage_metric") {
    if (v == "count") c.coverage_metric = CoverageMetric::count;
    else if (v == "estimate") c.coverage_metric = CoverageMetric::estimate;
    else throw InvalidConfig("coverage_metric must be count or estimate");
  } else if (key == "round_cap") c.round_cap = parse_number<int>(key, v);
  else throw InvalidConfig("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfig("line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  auto num = [](auto v) {
    if constexpr (std::is_floating_point_v<decltype(v)>) return csv::number(static_cast<double>(v));
    else return csv::number(static_cast<std::int64_t>(v));
  };
  out << "n=" << num(c.n) << '\n'
      << "n_max=" << num(c.n_max) << '\n'
      << "length=" << num(c.length) << '\n'
      << "width=" << num(c.width) << '\n'
      << "radius=" << num(c.radius) << '\n'
      << "f_initial=" << num(c.f_initial) << '\n'
      << "erasure=" << num(c.erasure) << '\n'
      << "rounds=" << num(c.rounds) << '\n'
      << "queried=" << num(c.queried) << '\n'
      << "trials=" << num(c.trials) << '\n'
      << "seed=" << std::to_string(c.seed) << '\n'
      << "distance_mode=" << (c.distance_mode == DistanceMode::planar ? "planar" : "toroidal") << '\n'
      << "topology=" << (c.topology ? "true" : "false") << '\n'
      << "coord_bits=" << num(c.coord_bits) << '\n'
      << "coverage_threshold=" << num(c.coverage_threshold) << '\n'
      << "coverage_metric=" << (c.coverage_metric == CoverageMetric::count ? "count" : "estimate") << '\n'
      << "round_cap=" << num(c.round_cap) << '\n';
  return out.str();
}

}  // namespace cardest
