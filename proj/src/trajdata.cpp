#include "plab/trajdata.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>

#include "plab/errors.hpp"
#include "plab/rng.hpp"

namespace plab::traj {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<TrajectoryRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgError("cannot read " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, kColumns.size()> column_at{};
  {
    if (!std::getline(in, line)) throw SchemaError(kColumns[0]);
    ++line_no;
    const auto header = split_fields(line);
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const auto it = std::find(header.begin(), header.end(), std::string_view(kColumns[c]));
      if (it == header.end()) throw SchemaError(kColumns[c]);
      column_at[c] = static_cast<std::size_t>(it - header.begin());
    }
  }
  const std::size_t needed = *std::max_element(column_at.begin(), column_at.end()) + 1;

  std::vector<TrajectoryRecord> records;
  double step = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < needed) throw ValueError("too few fields", line_no);
    std::array<double, kColumns.size()> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const std::string_view text = fields[column_at[c]];
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v[c]);
      if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v[c])) {
        throw ValueError("bad value '" + std::string(text) + "' in column " + kColumns[c], line_no);
      }
    }
    TrajectoryRecord r{v[0], v[1], v[2], v[3], v[4], v[5]};
    if (r.spacing <= 0.0) throw ValueError("spacing must be > 0", line_no);
    if (r.v_f < 0.0 || r.v_l < 0.0) throw ValueError("speeds must be >= 0", line_no);
    if (!records.empty()) {
      const double dt = r.t - records.back().t;
      if (records.size() == 1) {
        if (!(dt > 0.0)) throw SamplingError("timestamps must increase", line_no);
        step = dt;
      } else if (std::abs(dt - step) > kTimeTolerance) {
        throw SamplingError(fmt::format("time step {} differs from {}", dt, step), line_no);
      }
    }
    records.push_back(r);
  }
  return records;
}

void write_csv(const std::filesystem::path& path, std::span<const TrajectoryRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgError("cannot write " + path.string());
  out << "t,v_f,a_f,v_l,a_l,spacing\n";
  for (const TrajectoryRecord& r : records) {
    out << fmt::format("{},{},{},{},{},{}\n", r.t, r.v_f, r.a_f, r.v_l, r.a_l, r.spacing);
  }
}

std::vector<WindowSample> make_windows(std::span<const TrajectoryRecord> records, std::size_t k) {
  if (k < 1) throw ArgError("window length must be >= 1");
  if (records.size() < k + 1) {
    throw LengthError("need at least " + std::to_string(k + 1) + " records for windows of " +
                      std::to_string(k) + ", got " + std::to_string(records.size()));
  }
  std::vector<WindowSample> windows;
  windows.reserve(records.size() - k);
  for (std::size_t i = 0; i + k < records.size(); ++i) {
    WindowSample w;
    w.k = k;
    w.features.reserve(k * kChannels);
    for (std::size_t j = i; j < i + k; ++j) {
      const TrajectoryRecord& r = records[j];
      w.features.insert(w.features.end(), {r.v_f, r.a_f, r.v_l, r.a_l, r.spacing});
    }
    w.label = records[i + k].a_f;
    windows.push_back(std::move(w));
  }
  return windows;
}

SplitIndices split_indices(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train >= 0.0 && f.val >= 0.0 && f.test >= 0.0) || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ArgError("split fractions must be >= 0 and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::Stream stream(rng::derive(seed, {0x5b117}));
  rng::shuffle(std::span(order), stream);

  // The small offset keeps products such as 100 * 0.7 from flooring to 69.
  const auto n_train = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * f.train + 1e-9)));
  const auto n_val =
      std::min(n - n_train, static_cast<std::size_t>(std::floor(static_cast<double>(n) * f.val + 1e-9)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

void SynthConfig::validate() const {
  if (!(duration > 0.0) || !(dt > 0.0)) throw ArgError("duration and dt must be > 0");
  if (!(accel_noise_sigma >= 0.0)) throw ArgError("noise sigma must be >= 0");
  idm.validate();
  if (const auto* c = std::get_if<ConstantProfile>(&leader); c && !(c->v >= 0.0)) {
    throw ArgError("leader speed must be >= 0");
  }
  if (const auto* s = std::get_if<SineProfile>(&leader)) {
    if (!(s->period > 0.0) || !(s->amplitude >= 0.0) || !(s->amplitude < s->mean)) {
      throw ArgError("sine leader needs period > 0 and 0 <= amplitude < mean");
    }
  }
  if (const auto* g = std::get_if<StopAndGoProfile>(&leader)) {
    if (!(g->v_lo >= 0.0 && g->v_lo <= g->v_hi && g->v_start >= 0.0) ||
        !(g->segment_lo > 0.0 && g->segment_lo <= g->segment_hi)) {
      throw ArgError("stop-and-go leader needs 0 <= v_lo <= v_hi and 0 < segment_lo <= segment_hi");
    }
  }
  if (const auto* r = std::get_if<RampProfile>(&leader)) {
    if (r->knots.empty()) throw ArgError("ramp leader needs at least one knot");
    for (std::size_t i = 0; i < r->knots.size(); ++i) {
      if (!(r->knots[i].second >= 0.0)) throw ArgError("ramp speeds must be >= 0");
      if (i > 0 && !(r->knots[i].first > r->knots[i - 1].first)) throw ArgError("ramp knot times must increase");
    }
  }
}

RampProfile expand(const StopAndGoProfile& profile, double duration) {
  RampProfile ramp;
  ramp.knots.clear();
  rng::Stream stream(rng::derive(profile.seed, {0x57a9}));
  double t = 0.0;
  double v = profile.v_start;
  while (true) {
    ramp.knots.emplace_back(t, v);
    if (t > duration) break;
    t += stream.uniform(profile.segment_lo, profile.segment_hi);
    v = stream.uniform(profile.v_lo, profile.v_hi);
  }
  return ramp;
}

std::pair<double, double> leader_speed(const LeaderProfile& profile, double t) {
  if (const auto* g = std::get_if<StopAndGoProfile>(&profile)) return leader_speed(expand(*g, t), t);
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) return {c->v, 0.0};
  if (const auto* s = std::get_if<SineProfile>(&profile)) {
    const double w = 2.0 * std::numbers::pi / s->period;
    return {s->mean + s->amplitude * std::sin(w * t), s->amplitude * w * std::cos(w * t)};
  }
  const auto& knots = std::get<RampProfile>(profile).knots;
  if (t <= knots.front().first) return {knots.front().second, 0.0};
  if (t >= knots.back().first) return {knots.back().second, 0.0};
  const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double x, const std::pair<double, double>& k) { return x < k.first; });
  const auto lo = hi - 1;
  const double slope = (hi->second - lo->second) / (hi->first - lo->first);
  return {lo->second + slope * (t - lo->first), slope};
}

std::vector<TrajectoryRecord> synth_generate(const SynthConfig& config) {
  config.validate();
  const auto count = static_cast<std::size_t>(std::llround(config.duration / config.dt));
  const LeaderProfile profile = std::holds_alternative<StopAndGoProfile>(config.leader)
                                    ? LeaderProfile(expand(std::get<StopAndGoProfile>(config.leader), config.duration))
                                    : config.leader;
  std::vector<physics::LeaderSample> leader(count);
  double x = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    const auto [v, a] = leader_speed(profile, t);
    leader[i] = {t, v, x, a};
    x += v * config.dt;
  }
  if (leader.empty()) return {};

  const double v_init = leader[0].v;
  if (!(v_init < config.idm.v0)) throw ArgError("leader starts at or above the desired speed v0");
  const physics::CFState init{v_init, v_init, physics::equilibrium_gap(v_init, config.idm)};
  const auto follower = physics::simulate_follower(leader, config.idm, config.dt, init,
                                                   {config.accel_noise_sigma, config.seed});

  std::vector<TrajectoryRecord> records(count);
  for (std::size_t i = 0; i < count; ++i) {
    records[i] = {leader[i].t, follower[i].v, follower[i].a, leader[i].v, leader[i].a, follower[i].s};
  }
  return records;
}

}  // namespace plab::traj
