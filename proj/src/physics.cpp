#include "plab/physics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "plab/errors.hpp"
#include "plab/parallel.hpp"
#include "plab/rng.hpp"

namespace plab::physics {

namespace {

// (x)^delta with a multiply-only path for the common integer exponent.
double power(double x, double delta) {
  if (delta == 4.0) {
    const double x2 = x * x;
    return x2 * x2;
  }
  return std::pow(x, delta);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void IDMParams::validate() const {
  if (!positive_finite(v0) || !positive_finite(a_max) || !positive_finite(b) || !positive_finite(s0) ||
      !positive_finite(T_headway) || !positive_finite(delta)) {
    throw ArgError("IDM parameters must all be finite and > 0");
  }
}

double idm_desired_gap(const CFState& state, const IDMParams& p) {
  const double dv = state.v_lead - state.v;
  return p.s0 + state.v * p.T_headway - state.v * dv / (2.0 * std::sqrt(p.a_max * p.b));
}

double idm_accel(const CFState& state, const IDMParams& p) {
  if (!(state.s > 0.0)) throw StateError("gap must be > 0, got " + std::to_string(state.s));
  const double ratio = idm_desired_gap(state, p) / state.s;
  return p.a_max * (1.0 - power(state.v / p.v0, p.delta) - ratio * ratio);
}

double equilibrium_gap(double v, const IDMParams& p) {
  if (!(v >= 0.0 && v < p.v0)) throw ArgError("equilibrium needs 0 <= v < v0");
  return idm_desired_gap({v, v, 1.0}, p) / std::sqrt(1.0 - power(v / p.v0, p.delta));
}

std::vector<FollowerSample> simulate_follower(std::span<const LeaderSample> leader, const IDMParams& p,
                                              double dt, const CFState& init, const NoiseConfig& noise) {
  p.validate();
  if (!(dt > 0.0)) throw ArgError("dt must be > 0");
  if (!(init.s > 0.0) || !(init.v >= 0.0)) throw ArgError("initial state needs s > 0 and v >= 0");
  if (!(noise.sigma >= 0.0)) throw ArgError("noise sigma must be >= 0");
  std::vector<FollowerSample> out;
  if (leader.empty()) return out;
  out.reserve(leader.size());

  rng::Stream stream(rng::derive(noise.seed, {0x1d3}));
  FollowerSample cur{leader[0].t, init.v, 0.0, init.s, leader[0].x - init.s};
  out.push_back(cur);
  for (std::size_t i = 1; i < leader.size(); ++i) {
    double a = idm_accel({cur.v, leader[i - 1].v, cur.s}, p);
    if (noise.sigma > 0.0) a += noise.sigma * stream.normal();
    FollowerSample next;
    next.t = leader[i].t;
    next.v = std::max(0.0, cur.v + a * dt);
    next.a = (next.v - cur.v) / dt;
    next.x = cur.x + cur.v * dt;
    next.s = leader[i].x - next.x;
    if (!(next.s > 0.0)) throw CollisionError(i);
    out.push_back(next);
    cur = next;
  }
  return out;
}

void CalibrationRanges::validate() const {
  for (const Range& r : {v0, a_max, b, s0, T_headway}) {
    if (!positive_finite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo) {
      throw ArgError("calibration ranges need 0 < lo <= hi");
    }
  }
}

double acceleration_mse(std::span<const CalibrationSample> data, const IDMParams& p) {
  if (data.empty()) throw ArgError("no calibration data");
  double sum = 0.0;
  for (const CalibrationSample& d : data) {
    const double e = idm_accel(d.state, p) - d.accel;
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

CalibrationResult calibrate_monte_carlo(std::span<const CalibrationSample> data, const CalibrationRanges& ranges,
                                        std::size_t num_samples, std::uint64_t seed, double delta) {
  if (data.empty()) throw ArgError("no calibration data");
  if (num_samples < 1) throw ArgError("num_samples must be >= 1");
  ranges.validate();

  auto draw = [&](std::size_t i) {
    rng::Stream stream(rng::derive(seed, {0xca11, i}));
    IDMParams p;
    p.v0 = stream.uniform(ranges.v0.lo, ranges.v0.hi);
    p.a_max = stream.uniform(ranges.a_max.lo, ranges.a_max.hi);
    p.b = stream.uniform(ranges.b.lo, ranges.b.hi);
    p.s0 = stream.uniform(ranges.s0.lo, ranges.s0.hi);
    p.T_headway = stream.uniform(ranges.T_headway.lo, ranges.T_headway.hi);
    p.delta = delta;
    return p;
  };

  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (num_samples + kBlock - 1) / kBlock;
  std::vector<double> scores(num_samples);
  parallel_for(blocks, [&](std::size_t blk) {
    const std::size_t end = std::min(num_samples, (blk + 1) * kBlock);
    for (std::size_t i = blk * kBlock; i < end; ++i) scores[i] = acceleration_mse(data, draw(i));
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < num_samples; ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return {draw(best), scores[best], best};
}

void write_params(const std::filesystem::path& path, const IDMParams& p, double mse) {
  std::ofstream out(path);
  if (!out) throw ArgError("cannot write " + path.string());
  out << fmt::format("v0={}\na_max={}\nb={}\ns0={}\nT_headway={}\ndelta={}\nmse={}\n", p.v0, p.a_max, p.b, p.s0,
                     p.T_headway, p.delta, mse);
}

CalibrationResult read_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgError("cannot read " + path.string());
  std::map<std::string, double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigParseError("expected key=value", line_no);
    const std::string key = line.substr(0, eq);
    const std::string text = line.substr(eq + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigParseError("bad number '" + text + "'", line_no);
    }
    values[key] = v;
  }
  static const char* const kKeys[] = {"v0", "a_max", "b", "s0", "T_headway", "delta", "mse"};
  for (const auto& [key, v] : values) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
        std::end(kKeys)) {
      throw UnknownKeyError(key);
    }
  }
  for (const char* k : kKeys) {
    if (!values.contains(k)) throw ArgError(std::string("missing key '") + k + "' in " + path.string());
  }
  CalibrationResult r;
  r.params = {values["v0"], values["a_max"], values["b"], values["s0"], values["T_headway"], values["delta"]};
  r.params.validate();
  r.mse = values["mse"];
  return r;
}

}  // namespace plab::physics
