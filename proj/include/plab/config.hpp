#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plab/neural.hpp"
#include "plab/physics.hpp"
#include "plab/trajdata.hpp"

namespace plab::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr std::string_view kExperiments[] = {"pieces",     "converge",   "errors",  "param-sweep", "loss-curve",
                                                    "data-sweep", "bounds",     "calibrate", "synth"};

bool is_experiment(std::string_view name);

struct TrainOptions {
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::string optimizer = "adam";
  double final_lr_fraction = 1.0;

  nn::TrainConfig to_train_config() const;
  friend bool operator==(const TrainOptions&, const TrainOptions&) = default;
};

struct PiecesOptions {
  std::vector<double> eps{1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3, 7e-3, 8e-3, 9e-3};
  std::string metric = "sup";
  std::size_t grid = 64;
  friend bool operator==(const PiecesOptions&, const PiecesOptions&) = default;
};

struct ConvergeOptions {
  double x0 = 0.0;
  double tol = 1e-3;
  std::size_t max_iters = 1000;
  std::optional<double> eta;  // unset: 1 / (10 L) per function
  std::string stop_on = "value_gap";
  double grid_lo = 0.0;
  double grid_hi = 1.5;
  std::size_t grid_count = 20;
  friend bool operator==(const ConvergeOptions&, const ConvergeOptions&) = default;
};

struct ErrorsOptions {
  std::vector<std::size_t> sizes{10, 1000};
  std::size_t seeds = 10;
  std::size_t n_test = 100000;
  std::vector<std::size_t> hidden{128, 64};
  std::size_t min_steps = 10000;
  TrainOptions train{.learning_rate = 1e-3, .epochs = 300, .batch_size = 32, .optimizer = "adam",
                     .final_lr_fraction = 0.01};
  friend bool operator==(const ErrorsOptions&, const ErrorsOptions&) = default;
};

struct DataOptions {
  std::vector<std::string> csv;  // when nonempty, windows come from these files instead of the generator
  double duration = 600.0;
  double dt = 0.1;
  traj::LeaderProfile leader = traj::StopAndGoProfile{};
  physics::IDMParams idm{.v0 = 23.058, .a_max = 0.8, .b = 2.601, .s0 = 2.0, .T_headway = 1.4, .delta = 4.0};
  double noise = 0.05;
  std::size_t window = 30;
  friend bool operator==(const DataOptions&, const DataOptions&) = default;
};

struct SweepOptions {
  std::size_t seeds = 20;
  std::vector<std::size_t> hidden_sizes{16, 32, 64};
  std::vector<std::size_t> train_sizes{20, 50, 100, 150, 200};
  std::size_t train_size = 200;
  std::size_t hidden = 32;
  std::size_t layers = 2;
  std::size_t val_size = 64;
  std::size_t test_size = 512;
  std::string ci_method = "student_t";
  double ci_level = 0.99;
  std::size_t curve_epochs = 100;
  TrainOptions train;
  friend bool operator==(const SweepOptions&, const SweepOptions&) = default;
};

struct CalibrateOptions {
  std::size_t samples = 100000;
  physics::CalibrationRanges ranges;
  double delta = 4.0;
  friend bool operator==(const CalibrateOptions&, const CalibrateOptions&) = default;
};

struct BoundsOptions {
  std::string calculator = "required-sample-size";
  double c = 1.0;
  double eps = 0.1;
  double delta = 0.05;
  std::size_t n = 1000;
  double t = 0.1;
  double C = 1.0;
  double L = 1.0;
  double rad = 0.05;
  bool clamp = false;
  friend bool operator==(const BoundsOptions&, const BoundsOptions&) = default;
};

struct ExperimentConfig {
  std::string experiment = "pieces";
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  PiecesOptions pieces;
  ConvergeOptions converge;
  ErrorsOptions errors;
  DataOptions data;
  physics::IDMParams physics;  // the physics half of PERL
  SweepOptions sweep;
  CalibrateOptions calibrate;
  BoundsOptions bounds;

  // Throws ArgError / NameError for invalid values.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// YAML subset: nested maps, sequences and scalars. Missing keys keep their
// defaults; unknown keys raise UnknownKeyError with the dotted key path;
// syntax or type errors raise ConfigParseError with a 1-based line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Every field, in a form parse_config reads back to an equal config. The
// tool_version key is written too (and accepted, then ignored, on load).
std::string dump_config(const ExperimentConfig& config);

}  // namespace plab::cli
