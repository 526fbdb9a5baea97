#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "plab/neural.hpp"
#include "plab/physics.hpp"
#include "plab/trajdata.hpp"

namespace plab::perl {

using traj::WindowSample;

// Follower speed, leader speed and gap at the window's last step.
physics::CFState physics_state(const WindowSample& window);

double physics_prediction(const WindowSample& window, const physics::IDMParams& p);

// Same windows with label - physics_prediction.
std::vector<WindowSample> residual_labels(std::span<const WindowSample> windows, const physics::IDMParams& p);

// Last-step states paired with their labels, for physics calibration.
std::vector<physics::CalibrationSample> calibration_samples(std::span<const WindowSample> windows);

// Per-channel standardization fitted on training windows. Channels with no
// spread are centred only.
struct FeatureScaler {
  std::array<double, traj::kChannels> mean{};
  std::array<double, traj::kChannels> scale{1.0, 1.0, 1.0, 1.0, 1.0};

  static FeatureScaler fit(std::span<const WindowSample> windows);
  static FeatureScaler identity() { return {}; }
};

// Scaled features as LSTM input sequences, labels as targets.
nn::SampleSet to_sample_set(std::span<const WindowSample> windows, const FeatureScaler& scaler);

// An LSTM on scaled windows.
struct NetModel {
  nn::LSTMSpec spec;
  nn::Params params;
  FeatureScaler scaler;

  // Throws ShapeError when the window or params do not match the spec.
  double operator()(const WindowSample& window) const;
};

// Physics prediction plus the learned residual.
struct PERLModel {
  physics::IDMParams physics;
  NetModel residual;

  // A model whose residual net has all-zero parameters.
  static PERLModel with_zero_residual(const physics::IDMParams& p, const nn::LSTMSpec& spec);
};

double predict(const PERLModel& model, const WindowSample& window);

enum class CiMethod { student_t, bootstrap };

CiMethod parse_ci_method(std::string_view name);
std::string_view to_string(CiMethod method);

struct Interval99 {
  double low = 0.0;
  double high = 0.0;
};

// Two-sided confidence interval for the mean of the values. Student-t uses
// the t quantile with n-1 degrees of freedom; bootstrap takes percentiles of
// `resamples` seeded resampled means. Throws ArgError for fewer than 2 values.
Interval99 confidence_interval(std::span<const double> values, double level, CiMethod method,
                               std::size_t resamples = 10000, std::uint64_t seed = 0);

struct CompareConfig {
  physics::IDMParams physics;
  traj::SplitFractions fractions;
  std::optional<std::size_t> train_size;  // take this many windows from the training split
  std::size_t val_size = 64;               // cap on validation windows (loss curves)
  std::size_t test_size = 512;             // cap on test windows
  nn::TrainConfig train;
  bool with_ci = true;
  double ci_level = 0.99;
  CiMethod ci_method = CiMethod::student_t;
  std::size_t bootstrap_resamples = 10000;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double direct_mse = 0.0;
  double perl_mse = 0.0;
  std::vector<double> direct_val_curve;
  std::vector<double> perl_val_curve;
};

struct ModelSummary {
  std::string_view model;  // "direct" or "perl"
  double mean = 0.0;
  std::optional<Interval99> ci;
};

struct CompareReport {
  std::vector<SeedRun> runs;
  ModelSummary direct;
  ModelSummary perl;
};

// For each seed: split the windows, train an LSTM on the raw labels (direct)
// and one with the same spec on residual labels (PERL), then score both as
// acceleration predictors on the test split. Seeds run in parallel; each
// seed's split and initialization derive from the seed alone.
// Throws ArgError when the specs differ, when too few windows remain for the
// requested train size, or when CIs are requested with fewer than 2 seeds.
CompareReport compare(const nn::LSTMSpec& direct_spec, const nn::LSTMSpec& perl_spec,
                      std::span<const WindowSample> windows, const CompareConfig& config,
                      std::span<const std::uint64_t> seeds);

}  // namespace plab::perl
