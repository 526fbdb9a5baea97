#include "plab/experiments.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>

#include "plab/errors.hpp"
#include "plab/funcspace.hpp"
#include "plab/parallel.hpp"
#include "plab/pwl.hpp"
#include "plab/rng.hpp"
#include "plab/statbounds.hpp"

namespace plab::exp {

namespace fs = std::filesystem;

std::vector<std::uint64_t> run_seeds(std::uint64_t root, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = rng::derive(root, {0x5eed, i});
  return seeds;
}

std::vector<traj::TrajectoryRecord> synth_records(const cli::ExperimentConfig& config) {
  traj::SynthConfig synth;
  synth.duration = config.data.duration;
  synth.dt = config.data.dt;
  synth.leader = config.data.leader;
  if (auto* g = std::get_if<traj::StopAndGoProfile>(&synth.leader)) g->seed = rng::derive(config.seed, {0x1ead, g->seed});
  synth.idm = config.data.idm;
  synth.accel_noise_sigma = config.data.noise;
  synth.seed = rng::derive(config.seed, {0xda7a});
  return traj::synth_generate(synth);
}

std::vector<traj::WindowSample> dataset(const cli::ExperimentConfig& config) {
  const auto& files = config.data.csv;
  if (files.empty()) return traj::make_windows(synth_records(config), config.data.window);

  std::vector<std::vector<traj::WindowSample>> per_file(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    per_file[i] = traj::make_windows(traj::load_csv(files[i]), config.data.window);
  });
  std::vector<traj::WindowSample> out;
  for (auto& w : per_file) out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  return out;
}

namespace {

perl::CompareConfig compare_config(const cli::ExperimentConfig& config, std::size_t train_size, bool curves) {
  perl::CompareConfig c;
  c.physics = config.physics;
  c.train_size = train_size;
  c.val_size = config.sweep.val_size;
  c.test_size = config.sweep.test_size;
  c.train = config.sweep.train.to_train_config();
  c.train.track_validation = curves;
  c.with_ci = config.sweep.seeds >= 2;
  c.ci_level = config.sweep.ci_level;
  c.ci_method = perl::parse_ci_method(config.sweep.ci_method);
  return c;
}

nn::LSTMSpec lstm(std::size_t hidden, std::size_t layers) { return {traj::kChannels, hidden, layers}; }

}  // namespace

std::vector<SweepCell> param_sweep(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows) {
  const auto seeds = run_seeds(config.seed, config.sweep.seeds);
  const perl::CompareConfig c = compare_config(config, config.sweep.train_size, false);
  std::vector<SweepCell> cells;
  for (std::size_t h : config.sweep.hidden_sizes) {
    const nn::LSTMSpec spec = lstm(h, config.sweep.layers);
    cells.push_back({h, perl::compare(spec, spec, windows, c, seeds)});
  }
  return cells;
}

std::vector<SweepCell> data_sweep(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows) {
  const auto seeds = run_seeds(config.seed, config.sweep.seeds);
  const nn::LSTMSpec spec = lstm(config.sweep.hidden, config.sweep.layers);
  std::vector<SweepCell> cells;
  for (std::size_t n : config.sweep.train_sizes) {
    cells.push_back({n, perl::compare(spec, spec, windows, compare_config(config, n, false), seeds)});
  }
  return cells;
}

perl::CompareReport loss_curve(const cli::ExperimentConfig& config, std::span<const traj::WindowSample> windows) {
  const auto seeds = run_seeds(config.seed, config.sweep.seeds);
  const nn::LSTMSpec spec = lstm(config.sweep.hidden, config.sweep.layers);
  perl::CompareConfig c = compare_config(config, config.sweep.train_size, true);
  c.train.epochs = config.sweep.curve_epochs;
  return perl::compare(spec, spec, windows, c, seeds);
}

ConvergeResult converge(const cli::ConvergeOptions& options) {
  const gd::Objective f = gd::demo_objective("f_demo");
  const gd::Objective r = gd::demo_objective("r_demo");
  ConvergeResult out;
  out.lipschitz_f = f.target.lipschitz().value_or(funcspace::estimate_lipschitz(f.target));
  out.lipschitz_r = r.target.lipschitz().value_or(funcspace::estimate_lipschitz(r.target));
  out.eta_f = options.eta.value_or(1.0 / (10.0 * out.lipschitz_f));
  out.eta_r = options.eta.value_or(1.0 / (10.0 * out.lipschitz_r));

  auto config_for = [&](double x0, double eta) {
    gd::GDConfig c;
    c.x0 = x0;
    c.schedule = gd::ConstantStep{eta};
    c.max_iters = options.max_iters;
    c.tol = options.tol;
    c.stop_on = gd::parse_stop_criterion(options.stop_on);
    return c;
  };
  out.f = gd::run_gd(f, config_for(options.x0, out.eta_f));
  out.r = gd::run_gd(r, config_for(options.x0, out.eta_r));

  out.grid.resize(options.grid_count);
  parallel_for(options.grid_count, [&](std::size_t i) {
    const double x0 = options.grid_count == 1
                          ? options.grid_lo
                          : options.grid_lo + (options.grid_hi - options.grid_lo) * static_cast<double>(i) /
                                                  static_cast<double>(options.grid_count - 1);
    out.grid[i] = {x0, gd::run_gd(f, config_for(x0, out.eta_f)).iterations_to_tol,
                   gd::run_gd(r, config_for(x0, out.eta_r)).iterations_to_tol};
  });
  return out;
}

double bounds_value(const cli::BoundsOptions& b, std::uint64_t seed) {
  auto shown = [&](double p) { return b.clamp ? stats::clamp_probability(p) : p; };
  if (b.calculator == "required-sample-size") return static_cast<double>(stats::required_sample_size(b.c, b.eps, b.delta));
  if (b.calculator == "hoeffding") return shown(stats::hoeffding_tail(b.n, b.t, b.c));
  if (b.calculator == "estimation-tail") return shown(stats::estimation_tail(b.n, b.eps, b.c));
  if (b.calculator == "loss-lipschitz") return stats::loss_lipschitz(b.C, b.L);
  if (b.calculator == "generalization") return shown(stats::generalization_bound(b.C, b.L, b.rad, b.c, b.delta, b.n));
  if (b.calculator == "rademacher") {
    // The two constant functions +-1 on n points.
    stats::FiniteClass cls{{[](double) { return 1.0; }, [](double) { return -1.0; }}};
    std::vector<double> xs(b.n);
    for (std::size_t i = 0; i < b.n; ++i) xs[i] = static_cast<double>(i);
    return stats::empirical_rademacher(cls, xs, 10000, seed).value;
  }
  throw NameError("unknown bounds calculator '" + b.calculator +
                  "' (required-sample-size, hoeffding, estimation-tail, loss-lipschitz, generalization, rademacher)");
}

// ------------------------------------------------------------- runner ----

namespace {

std::string num(double x) { return fmt::format("{}", x); }

std::string opt(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); }

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ArgError("cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw ArgError("cannot write " + path.string());
    files_.push_back(path);
  }

  const fs::path& dir() const { return dir_; }
  std::vector<fs::path> files() const { return files_; }
  void add(fs::path path) { files_.push_back(std::move(path)); }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

std::string ci_cell(const perl::ModelSummary& m, bool low) {
  if (!m.ci) return {};
  return num(low ? m.ci->low : m.ci->high);
}

void append_summary(std::string& s, const std::string& cell, const perl::CompareReport& rep) {
  for (const perl::ModelSummary* m : {&rep.direct, &rep.perl}) {
    s += fmt::format("{}{},{},{},{}\n", cell, m->model, num(m->mean), ci_cell(*m, true), ci_cell(*m, false));
  }
}

void append_runs(std::string& s, const std::string& cell, const perl::CompareReport& rep) {
  for (const perl::SeedRun& r : rep.runs) {
    s += fmt::format("{}{},direct,{}\n", cell, r.seed, num(r.direct_mse));
    s += fmt::format("{}{},perl,{}\n", cell, r.seed, num(r.perl_mse));
  }
}

void write_sweep(Writer& w, std::ostream& out, const char* column, const std::vector<SweepCell>& cells) {
  std::string summary = fmt::format("{},model,mean,ci_low,ci_high\n", column);
  std::string runs = fmt::format("{},seed,model,test_mse\n", column);
  for (const SweepCell& c : cells) {
    const std::string cell = std::to_string(c.value) + ",";
    append_summary(summary, cell, c.report);
    append_runs(runs, cell, c.report);
    fmt::print(out, "{}={}: direct {:.5g}, perl {:.5g}\n", column, c.value, c.report.direct.mean, c.report.perl.mean);
  }
  w.write("summary.csv", summary);
  w.write("runs.csv", runs);
}

void run_pieces(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const ScalarTarget f = funcspace::make_builtin("f_demo");
  const ScalarTarget r = funcspace::make_builtin("r_demo");
  const auto rows = pwl::pieces_table(f, r, c.pieces.eps, pwl::parse_metric(c.pieces.metric), c.pieces.grid);
  std::string s = "eps,n_f,n_r,reduction_percent\n";
  double mean = 0.0;
  for (const auto& row : rows) {
    s += fmt::format("{},{},{},{}\n", num(row.eps), row.n_f, row.n_r, num(row.reduction_percent));
    mean += row.reduction_percent;
  }
  w.write("summary.csv", s);
  fmt::print(out, "{} tolerances, mean reduction {:.2f}%\n", rows.size(), mean / static_cast<double>(rows.size()));
}

std::string trace_csv(const gd::GDTrace& t) {
  std::string s = "t,x,f,gap\n";
  for (std::size_t i = 0; i < t.iterates.size(); ++i) {
    s += fmt::format("{},{},{},{}\n", i + 1, num(t.iterates[i]), num(t.values[i]), num(t.values[i] - t.f_star));
  }
  return s;
}

void run_converge(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const ConvergeResult res = converge(c.converge);
  w.write("trace_f.csv", trace_csv(res.f));
  w.write("trace_r.csv", trace_csv(res.r));

  std::string s = "function,x0,eta,iterations_to_tol,avg_gap,bound\n";
  auto row = [&](const char* name, const gd::GDTrace& t, double eta, double L) {
    s += fmt::format("{},{},{},{},{},{}\n", name, num(c.converge.x0), num(eta), opt(t.iterations_to_tol),
                     num(gd::avg_gap(t)), num(gd::constant_step_bound(t.radius, L, eta, t.horizon)));
  };
  row("f", res.f, res.eta_f, res.lipschitz_f);
  row("r", res.r, res.eta_r, res.lipschitz_r);
  w.write("summary.csv", s);

  std::string g = "x0,iters_f,iters_r,reduction_percent\n";
  for (const ConvergePoint& p : res.grid) {
    std::string red;
    if (p.iters_f && p.iters_r && *p.iters_f > 0) {
      red = num(100.0 * (static_cast<double>(*p.iters_f) - static_cast<double>(*p.iters_r)) /
                static_cast<double>(*p.iters_f));
    }
    g += fmt::format("{},{},{},{}\n", num(p.x0), opt(p.iters_f), opt(p.iters_r), red);
  }
  w.write("grid.csv", g);
  fmt::print(out, "iterations to tol from x0={}: f {}, r {}\n", num(c.converge.x0),
             res.f.iterations_to_tol ? opt(res.f.iterations_to_tol) : "not reached",
             res.r.iterations_to_tol ? opt(res.r.iterations_to_tol) : "not reached");
}

void run_errors(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  stats::MlpTrainerConfig tc;
  tc.hidden = c.errors.hidden;
  tc.min_steps = c.errors.min_steps;
  tc.train = c.errors.train.to_train_config();
  const stats::ErrorTable table =
      stats::error_table(stats::mlp_trainer(tc), c.errors.sizes, c.errors.seeds, c.seed, c.errors.n_test);

  std::string s = "n,function,gen_error,est_error,gen_improvement_pct,est_improvement_pct\n";
  for (const auto& r : table.rows) {
    s += fmt::format("{},{},{},{},{},{}\n", r.n, r.function, num(r.gen_error), num(r.est_error),
                     num(r.gen_improvement_pct), num(r.est_improvement_pct));
    if (r.function == "r") {
      fmt::print(out, "n={}: gen improvement {:.1f}%, est improvement {:.1f}%\n", r.n, r.gen_improvement_pct,
                 r.est_improvement_pct);
    }
  }
  w.write("summary.csv", s);

  std::string runs = "n,seed,function,train_risk,test_risk,gen_error,est_error\n";
  for (const auto& r : table.runs) {
    for (const auto& [name, rep] : {std::pair{"f", &r.direct}, std::pair{"r", &r.residual}}) {
      runs += fmt::format("{},{},{},{},{},{},{}\n", r.n, r.seed, name, num(rep->train_risk), num(rep->test_risk),
                          num(rep->gen_error), num(rep->est_error));
    }
  }
  w.write("runs.csv", runs);
}

void run_loss_curve(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const auto windows = dataset(c);
  const perl::CompareReport rep = loss_curve(c, windows);
  std::string curves = "epoch,direct_val_loss,perl_val_loss\n";
  const std::size_t epochs = rep.runs.front().direct_val_curve.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    double d = 0.0;
    double p = 0.0;
    for (const auto& r : rep.runs) {
      d += r.direct_val_curve[e];
      p += r.perl_val_curve[e];
    }
    const auto n = static_cast<double>(rep.runs.size());
    curves += fmt::format("{},{},{}\n", e + 1, num(d / n), num(p / n));
  }
  w.write("curves.csv", curves);

  std::string summary = "model,mean,ci_low,ci_high\n";
  append_summary(summary, "", rep);
  w.write("summary.csv", summary);
  std::string runs = "seed,model,test_mse\n";
  append_runs(runs, "", rep);
  w.write("runs.csv", runs);
  fmt::print(out, "test MSE after {} epochs: direct {:.5g}, perl {:.5g}\n", epochs, rep.direct.mean, rep.perl.mean);
}

void run_bounds(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const double v = bounds_value(c.bounds, c.seed);
  fmt::print(out, "{}\n", num(v));
  w.write("summary.csv", fmt::format("calculator,value\n{},{}\n", c.bounds.calculator, num(v)));
}

void run_calibrate(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const auto windows = dataset(c);
  const auto samples = perl::calibration_samples(windows);
  const physics::CalibrationResult res = physics::calibrate_monte_carlo(
      samples, c.calibrate.ranges, c.calibrate.samples, rng::derive(c.seed, {0xca1b}), c.calibrate.delta);
  const fs::path params = w.dir() / "calibrated_params.txt";
  physics::write_params(params, res.params, res.mse);
  w.add(params);
  const auto& p = res.params;
  w.write("summary.csv", fmt::format("v0,a_max,b,s0,T_headway,delta,mse\n{},{},{},{},{},{},{}\n", num(p.v0),
                                     num(p.a_max), num(p.b), num(p.s0), num(p.T_headway), num(p.delta),
                                     num(res.mse)));
  fmt::print(out, "calibrated on {} windows: mse {:.6g}\n", samples.size(), res.mse);
}

void run_synth(const cli::ExperimentConfig& c, Writer& w, std::ostream& out) {
  const auto records = synth_records(c);
  const fs::path path = w.dir() / "trajectory.csv";
  traj::write_csv(path, records);
  w.add(path);
  fmt::print(out, "{} records\n", records.size());
}

}  // namespace

std::vector<fs::path> run(const cli::ExperimentConfig& config, std::ostream& out) {
  config.validate();
  Writer w(config.output_dir);
  const std::string& e = config.experiment;
  if (e == "pieces") {
    run_pieces(config, w, out);
  } else if (e == "converge") {
    run_converge(config, w, out);
  } else if (e == "errors") {
    run_errors(config, w, out);
  } else if (e == "param-sweep") {
    write_sweep(w, out, "hidden", param_sweep(config, dataset(config)));
  } else if (e == "data-sweep") {
    write_sweep(w, out, "train_size", data_sweep(config, dataset(config)));
  } else if (e == "loss-curve") {
    run_loss_curve(config, w, out);
  } else if (e == "bounds") {
    run_bounds(config, w, out);
  } else if (e == "calibrate") {
    run_calibrate(config, w, out);
  } else if (e == "synth") {
    run_synth(config, w, out);
  }
  w.write("manifest.yaml", cli::dump_config(config));
  return w.files();
}

}  // namespace plab::exp
