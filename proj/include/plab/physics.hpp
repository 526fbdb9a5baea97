#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace plab::physics {

// Intelligent Driver Model parameters. Defaults are the calibrated values
// used throughout the experiments, with the usual exponent delta = 4.
struct IDMParams {
  double v0 = 23.058;      // desired speed, m/s
  double a_max = 0.572;    // maximum acceleration, m/s^2
  double b = 2.601;        // comfortable deceleration, m/s^2
  double s0 = 1.605;       // minimum gap, m
  double T_headway = 1.165;  // desired time headway, s
  double delta = 4.0;

  // Throws ArgError unless every field is finite and > 0.
  void validate() const;

  friend bool operator==(const IDMParams&, const IDMParams&) = default;
};

struct CFState {
  double v = 0.0;       // follower speed
  double v_lead = 0.0;  // leader speed
  double s = 0.0;       // gap to the leader
};

// s0 + v T + v (v - v_lead) / (2 sqrt(a_max b)), unclamped.
double idm_desired_gap(const CFState& state, const IDMParams& p);

// a_max (1 - (v / v0)^delta - (s* / s)^2). Throws StateError if s <= 0.
double idm_accel(const CFState& state, const IDMParams& p);

// Gap at which idm_accel is 0 when both vehicles drive at speed v:
// s*(v, 0) / sqrt(1 - (v / v0)^delta). Throws ArgError unless 0 <= v < v0.
double equilibrium_gap(double v, const IDMParams& p);

struct LeaderSample {
  double t = 0.0;
  double v = 0.0;
  double x = 0.0;  // position of the leader
  double a = 0.0;
};

struct FollowerSample {
  double t = 0.0;
  double v = 0.0;
  double a = 0.0;  // acceleration applied over the step ending at t (0 for the first sample)
  double s = 0.0;
  double x = 0.0;
};

struct NoiseConfig {
  double sigma = 0.0;  // std of Gaussian noise added to each commanded acceleration
  std::uint64_t seed = 0;
};

// Explicit Euler: a = idm_accel(state) (+ noise), v' = max(0, v + a dt),
// x' = x + v dt, s' = x_lead' - x'. The follower starts init.s behind the
// first leader sample. One output sample per leader sample. Throws
// CollisionError with the step index when the gap reaches 0.
std::vector<FollowerSample> simulate_follower(std::span<const LeaderSample> leader, const IDMParams& p,
                                              double dt, const CFState& init, const NoiseConfig& noise = {});

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct CalibrationRanges {
  Range v0{10.0, 40.0};
  Range a_max{0.1, 3.0};
  Range b{0.5, 5.0};
  Range s0{0.5, 5.0};
  Range T_headway{0.5, 3.0};

  void validate() const;
  friend bool operator==(const CalibrationRanges&, const CalibrationRanges&) = default;
};

// One observed car-following state and the acceleration that followed it.
struct CalibrationSample {
  CFState state;
  double accel = 0.0;
};

struct CalibrationResult {
  IDMParams params;
  double mse = 0.0;
  std::size_t best_index = 0;
};

// Mean squared one-step acceleration error of p over the data.
double acceleration_mse(std::span<const CalibrationSample> data, const IDMParams& p);

// Random search: draw i has its own counter-derived generator, so any prefix
// of the draws is the same for every num_samples and thread count. Ties go
// to the lowest index. delta is held at the given value.
CalibrationResult calibrate_monte_carlo(std::span<const CalibrationSample> data, const CalibrationRanges& ranges,
                                        std::size_t num_samples, std::uint64_t seed, double delta = 4.0);

// key=value text with v0, a_max, b, s0, T_headway, delta and mse.
void write_params(const std::filesystem::path& path, const IDMParams& p, double mse);
CalibrationResult read_params(const std::filesystem::path& path);

}  // namespace plab::physics
