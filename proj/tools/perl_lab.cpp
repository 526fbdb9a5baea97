// perl-lab: runs one experiment and writes its CSVs and manifest.
//
//   perl-lab <experiment> [--config file] [--seed N] [--out dir] [flags]
//
// Flags override values from the config file. Exit status: 0 on success,
// 2 for usage or validation errors, 3 when a run fails.

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include "plab/config.hpp"
#include "plab/errors.hpp"
#include "plab/experiments.hpp"

namespace {

using plab::cli::ExperimentConfig;
using Apply = std::function<void(ExperimentConfig&)>;

struct Overrides {
  std::vector<Apply> apply;

  template <typename T, typename Field>
  void add(CLI::App* app, const std::string& name, Field field, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    apply.push_back([opt, value, field](ExperimentConfig& c) {
      if (opt->count() > 0) field(c) = *value;
    });
  }

  template <typename Field>
  void add_flag(CLI::App* app, const std::string& name, Field field, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, help);
    apply.push_back([opt, field](ExperimentConfig& c) {
      if (opt->count() > 0) field(c) = true;
    });
  }
};

#define FIELD(path) [](ExperimentConfig& c) -> auto& { return c.path; }

void sweep_flags(CLI::App* s, Overrides& ov) {
  ov.add<std::size_t>(s, "--seeds", FIELD(sweep.seeds), "number of seeds");
  ov.add<std::size_t>(s, "--hidden", FIELD(sweep.hidden), "LSTM hidden units");
  ov.add<std::size_t>(s, "--layers", FIELD(sweep.layers), "LSTM layers");
  ov.add<std::size_t>(s, "--train-size", FIELD(sweep.train_size), "training windows");
  ov.add<std::size_t>(s, "--epochs", FIELD(sweep.train.epochs), "training epochs");
  ov.add<double>(s, "--lr", FIELD(sweep.train.learning_rate), "learning rate");
  ov.add<std::string>(s, "--ci-method", FIELD(sweep.ci_method), "student_t or bootstrap");
  ov.add<std::vector<std::string>>(s, "--csv", FIELD(data.csv), "trajectory CSV files instead of synthetic data");
  ov.add<double>(s, "--duration", FIELD(data.duration), "synthetic duration, s");
  ov.add<double>(s, "--noise", FIELD(data.noise), "synthetic acceleration noise std");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-enhanced residual learning workbench"};
  app.set_version_flag("--version", std::string(plab::cli::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  Overrides ov;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "root seed");
    s->add_option("--out", out_dir, "output directory");
  };

  CLI::App* pieces = app.add_subcommand("pieces", "segment counts for f_demo and r_demo");
  ov.add<std::vector<double>>(pieces, "--eps", FIELD(pieces.eps), "tolerances");
  ov.add<std::string>(pieces, "--metric", FIELD(pieces.metric), "sup or l1");
  ov.add<std::size_t>(pieces, "--grid", FIELD(pieces.grid), "grid points per segment");

  CLI::App* conv = app.add_subcommand("converge", "gradient descent on f_demo and r_demo");
  ov.add<double>(conv, "--x0", FIELD(converge.x0), "initial point");
  ov.add<double>(conv, "--tol", FIELD(converge.tol), "stopping tolerance");
  ov.add<std::size_t>(conv, "--max-iters", FIELD(converge.max_iters), "iterations");
  ov.add<std::optional<double>>(conv, "--eta", FIELD(converge.eta), "constant step (default 1/(10L))");
  ov.add<std::string>(conv, "--stop-on", FIELD(converge.stop_on), "value_gap or iterate_step");
  ov.add<std::size_t>(conv, "--grid-count", FIELD(converge.grid_count), "x0 grid points");

  CLI::App* errors = app.add_subcommand("errors", "generalization and estimation errors, direct vs residual");
  ov.add<std::vector<std::size_t>>(errors, "--sizes", FIELD(errors.sizes), "training sizes");
  ov.add<std::size_t>(errors, "--seeds", FIELD(errors.seeds), "seeds per size");
  ov.add<std::size_t>(errors, "--n-test", FIELD(errors.n_test), "test samples");
  ov.add<std::size_t>(errors, "--epochs", FIELD(errors.train.epochs), "training epochs");
  ov.add<std::size_t>(errors, "--min-steps", FIELD(errors.min_steps), "minimum optimizer steps per fit");
  auto large_row = std::make_shared<bool>(false);
  errors->add_flag("--large", *large_row, "add the n = 100000 row");

  CLI::App* psweep = app.add_subcommand("param-sweep", "direct vs PERL across hidden sizes");
  sweep_flags(psweep, ov);
  ov.add<std::vector<std::size_t>>(psweep, "--hidden-sizes", FIELD(sweep.hidden_sizes), "hidden widths");

  CLI::App* curve = app.add_subcommand("loss-curve", "validation loss curves, direct vs PERL");
  sweep_flags(curve, ov);
  ov.add<std::size_t>(curve, "--curve-epochs", FIELD(sweep.curve_epochs), "epochs to record");

  CLI::App* dsweep = app.add_subcommand("data-sweep", "direct vs PERL across training sizes");
  sweep_flags(dsweep, ov);
  ov.add<std::vector<std::size_t>>(dsweep, "--train-sizes", FIELD(sweep.train_sizes), "training sizes");

  CLI::App* bounds = app.add_subcommand("bounds", "sample-size and generalization calculators");
  ov.add<std::string>(bounds, "calculator", FIELD(bounds.calculator),
                      "required-sample-size, hoeffding, estimation-tail, loss-lipschitz, generalization, rademacher");
  ov.add<double>(bounds, "--c", FIELD(bounds.c), "loss bound c");
  ov.add<double>(bounds, "--eps", FIELD(bounds.eps), "accuracy eps");
  ov.add<double>(bounds, "--delta", FIELD(bounds.delta), "failure probability");
  ov.add<std::size_t>(bounds, "--n", FIELD(bounds.n), "sample size");
  ov.add<double>(bounds, "--t", FIELD(bounds.t), "deviation t");
  ov.add<double>(bounds, "--C", FIELD(bounds.C), "output bound C");
  ov.add<double>(bounds, "--L", FIELD(bounds.L), "Lipschitz constant L");
  ov.add<double>(bounds, "--rad", FIELD(bounds.rad), "Rademacher complexity");
  ov.add_flag(bounds, "--clamp", FIELD(bounds.clamp), "clip probabilities to 1");

  CLI::App* calib = app.add_subcommand("calibrate", "Monte-Carlo IDM calibration");
  ov.add<std::size_t>(calib, "--samples", FIELD(calibrate.samples), "random draws");
  ov.add<std::vector<std::string>>(calib, "--csv", FIELD(data.csv), "trajectory CSV files");
  ov.add<double>(calib, "--noise", FIELD(data.noise), "synthetic acceleration noise std");

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic trajectory CSV");
  ov.add<double>(synth, "--duration", FIELD(data.duration), "seconds");
  ov.add<double>(synth, "--dt", FIELD(data.dt), "step, s");
  ov.add<double>(synth, "--noise", FIELD(data.noise), "acceleration noise std");

  for (CLI::App* s : {pieces, conv, errors, psweep, curve, dsweep, bounds, calib, synth}) common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : plab::cli::load_config(config_path);
    config.experiment = app.get_subcommands().front()->get_name();
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    for (const Apply& a : ov.apply) a(config);
    if (*large_row && std::find(config.errors.sizes.begin(), config.errors.sizes.end(), 100000) ==
                          config.errors.sizes.end()) {
      config.errors.sizes.push_back(100000);
    }
    config.validate();
    plab::exp::run(config, std::cout);
  } catch (const plab::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
