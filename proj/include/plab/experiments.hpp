#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "plab/config.hpp"
#include "plab/gdharness.hpp"
#include "plab/perl.hpp"
#include "plab/trajdata.hpp"

namespace plab::exp {

// The per-run seeds of a sweep: derive(root, {0x5eed, i}). Every sweep cell
// uses the same list, so cells differ only in the swept quantity.
std::vector<std::uint64_t> run_seeds(std::uint64_t root, std::size_t count);

// Synthetic trajectory for the data section. The noise stream and any
// stop-and-go leader seed are mixed with the root seed.
std::vector<traj::TrajectoryRecord> synth_records(const cli::ExperimentConfig& config);

// Windows from the listed CSV files (never crossing file boundaries), or
// from synth_records when no files are listed.
std::vector<traj::WindowSample> dataset(const cli::ExperimentConfig& config);

struct SweepCell {
  std::size_t value = 0;  // hidden width or training-set size
  perl::CompareReport report;
};

// Direct vs PERL at each hidden width, sweep.train_size training windows.
std::vector<SweepCell> param_sweep(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows);

// Direct vs PERL at each training-set size, sweep.hidden units.
std::vector<SweepCell> data_sweep(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows);

// One comparison trained for sweep.curve_epochs with validation losses kept.
perl::CompareReport loss_curve(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows);

struct ConvergePoint {
  double x0 = 0.0;
  std::optional<std::size_t> iters_f;
  std::optional<std::size_t> iters_r;
};

struct ConvergeResult {
  gd::GDTrace f;  // f_demo from converge.x0
  gd::GDTrace r;  // r_demo from converge.x0
  double eta_f = 0.0;
  double eta_r = 0.0;
  double lipschitz_f = 0.0;
  double lipschitz_r = 0.0;
  std::vector<ConvergePoint> grid;
};

// Constant-step GD on f_demo and r_demo. Without an explicit eta each target
// uses 1 / (10 L) with its own L.
ConvergeResult converge(const cli::ConvergeOptions& options);

// The selected calculator's result as printed by the bounds experiment.
double bounds_value(const cli::BoundsOptions& options, std::uint64_t seed);

// Runs the configured experiment, writing its CSVs and manifest.yaml into
// output_dir and a short report to out. Returns the files written.
std::vector<std::filesystem::path> run(const cli::ExperimentConfig& config, std::ostream& out);

}  // namespace plab::exp
