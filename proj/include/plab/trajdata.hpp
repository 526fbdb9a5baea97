#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "plab/physics.hpp"

namespace plab::traj {

struct TrajectoryRecord {
  double t = 0.0;
  double v_f = 0.0;
  double a_f = 0.0;
  double v_l = 0.0;
  double a_l = 0.0;
  double spacing = 0.0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

inline constexpr std::array<const char*, 6> kColumns{"t", "v_f", "a_f", "v_l", "a_l", "spacing"};
inline constexpr double kTimeTolerance = 1e-6;

// Reads a CSV with a header naming the six columns (any order; extra columns
// are ignored). Row numbers in errors are 1-based file lines.
//   missing column            -> SchemaError
//   step differs from the first step by more than 1e-6 s -> SamplingError
//   non-finite or unparsable value, negative speed, spacing <= 0 -> ValueError
std::vector<TrajectoryRecord> load_csv(const std::filesystem::path& path);

// Header plus one line per record, numbers in shortest round-trip form.
void write_csv(const std::filesystem::path& path, std::span<const TrajectoryRecord> records);

inline constexpr std::size_t kChannels = 5;  // v_f, a_f, v_l, a_l, spacing

struct WindowSample {
  std::size_t k = 0;
  std::vector<double> features;  // k x 5, row-major, oldest step first
  double label = 0.0;            // a_f at the step after the window

  double at(std::size_t step, std::size_t channel) const { return features[step * kChannels + channel]; }
};

// Window i covers records i..i+k-1 and is labelled with a_f of record i+k.
// Throws LengthError when fewer than k+1 records are given.
std::vector<WindowSample> make_windows(std::span<const TrajectoryRecord> records, std::size_t k = 30);

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded permutation of 0..n-1 cut into floor(n * train), floor(n * val) and
// the remainder. Throws ArgError unless the fractions are >= 0 and sum to 1
// within 1e-9.
SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

template <typename T>
Split<T> split(const std::vector<T>& items, const SplitFractions& fractions, std::uint64_t seed) {
  const SplitIndices idx = split_indices(items.size(), fractions, seed);
  Split<T> out;
  for (std::size_t i : idx.train) out.train.push_back(items[i]);
  for (std::size_t i : idx.val) out.val.push_back(items[i]);
  for (std::size_t i : idx.test) out.test.push_back(items[i]);
  return out;
}

struct ConstantProfile {
  double v = 15.0;
  friend bool operator==(const ConstantProfile&, const ConstantProfile&) = default;
};

// v(t) = mean + amplitude sin(2 pi t / period)
struct SineProfile {
  double mean = 15.0;
  double amplitude = 3.0;
  double period = 30.0;
  friend bool operator==(const SineProfile&, const SineProfile&) = default;
};

// Piecewise-linear speed through (t, v) knots, constant beyond the ends.
struct RampProfile {
  std::vector<std::pair<double, double>> knots{{0.0, 15.0}, {20.0, 20.0}, {40.0, 10.0}, {60.0, 15.0}};
  friend bool operator==(const RampProfile&, const RampProfile&) = default;
};

// Random stop-and-go traffic: ramps between speeds drawn uniformly from
// [v_lo, v_hi], each lasting a uniform [segment_lo, segment_hi] seconds. The
// first ramp starts at v_start.
struct StopAndGoProfile {
  double v_start = 12.0;
  double v_lo = 3.0;
  double v_hi = 20.0;
  double segment_lo = 3.0;
  double segment_hi = 8.0;
  std::uint64_t seed = 0;
  friend bool operator==(const StopAndGoProfile&, const StopAndGoProfile&) = default;
};

// The ramp knots a stop-and-go profile passes through on [0, duration].
RampProfile expand(const StopAndGoProfile& profile, double duration);

using LeaderProfile = std::variant<ConstantProfile, SineProfile, RampProfile, StopAndGoProfile>;

struct SynthConfig {
  double duration = 600.0;
  double dt = 0.1;
  LeaderProfile leader = SineProfile{};
  physics::IDMParams idm;
  double accel_noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Leader speed and its time derivative.
std::pair<double, double> leader_speed(const LeaderProfile& profile, double t);

// round(duration / dt) records at t = i dt. The leader follows the profile
// (position by Euler steps), the follower is simulated with the IDM starting
// at the equilibrium gap for the leader's initial speed, with seeded Gaussian
// noise on every commanded acceleration.
std::vector<TrajectoryRecord> synth_generate(const SynthConfig& config);

}  // namespace plab::traj
