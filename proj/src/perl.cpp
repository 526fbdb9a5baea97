#include "plab/perl.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "plab/errors.hpp"
#include "plab/parallel.hpp"
#include "plab/rng.hpp"

namespace plab::perl {

namespace {

constexpr std::size_t kVf = 0;
constexpr std::size_t kVl = 2;
constexpr std::size_t kSpacing = 4;

}  // namespace

physics::CFState physics_state(const WindowSample& window) {
  if (window.k < 1 || window.features.size() != window.k * traj::kChannels) {
    throw ShapeError("window features do not match its length");
  }
  const std::size_t last = window.k - 1;
  return {window.at(last, kVf), window.at(last, kVl), window.at(last, kSpacing)};
}

double physics_prediction(const WindowSample& window, const physics::IDMParams& p) {
  return physics::idm_accel(physics_state(window), p);
}

std::vector<WindowSample> residual_labels(std::span<const WindowSample> windows, const physics::IDMParams& p) {
  std::vector<WindowSample> out(windows.begin(), windows.end());
  for (WindowSample& w : out) w.label -= physics_prediction(w, p);
  return out;
}

std::vector<physics::CalibrationSample> calibration_samples(std::span<const WindowSample> windows) {
  std::vector<physics::CalibrationSample> out;
  out.reserve(windows.size());
  for (const WindowSample& w : windows) out.push_back({physics_state(w), w.label});
  return out;
}

FeatureScaler FeatureScaler::fit(std::span<const WindowSample> windows) {
  FeatureScaler s;
  std::array<double, traj::kChannels> sum{};
  std::array<double, traj::kChannels> sq{};
  std::size_t count = 0;
  for (const WindowSample& w : windows) {
    for (std::size_t t = 0; t < w.k; ++t) {
      for (std::size_t c = 0; c < traj::kChannels; ++c) sum[c] += w.at(t, c);
    }
    count += w.k;
  }
  if (count == 0) return s;
  for (std::size_t c = 0; c < traj::kChannels; ++c) s.mean[c] = sum[c] / static_cast<double>(count);
  for (const WindowSample& w : windows) {
    for (std::size_t t = 0; t < w.k; ++t) {
      for (std::size_t c = 0; c < traj::kChannels; ++c) {
        const double d = w.at(t, c) - s.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (std::size_t c = 0; c < traj::kChannels; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(count));
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

nn::SampleSet to_sample_set(std::span<const WindowSample> windows, const FeatureScaler& scaler) {
  const std::size_t k = windows.empty() ? 1 : windows.front().k;
  nn::SampleSet set(k, traj::kChannels);
  set.reserve(windows.size());
  std::vector<double> buf(k * traj::kChannels);
  for (const WindowSample& w : windows) {
    if (w.k != k || w.features.size() != buf.size()) throw ShapeError("windows have different lengths");
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const std::size_t c = i % traj::kChannels;
      buf[i] = (w.features[i] - scaler.mean[c]) / scaler.scale[c];
    }
    set.add(buf, w.label);
  }
  return set;
}

double NetModel::operator()(const WindowSample& window) const {
  const nn::SampleSet one = to_sample_set(std::span(&window, 1), scaler);
  return nn::forward(spec, params, one.input(0));
}

PERLModel PERLModel::with_zero_residual(const physics::IDMParams& p, const nn::LSTMSpec& spec) {
  return {p, NetModel{spec, nn::Params(nn::count_params(spec), 0.0), FeatureScaler::identity()}};
}

double predict(const PERLModel& model, const WindowSample& window) {
  return physics_prediction(window, model.physics) + model.residual(window);
}

CiMethod parse_ci_method(std::string_view name) {
  if (name == "student_t") return CiMethod::student_t;
  if (name == "bootstrap") return CiMethod::bootstrap;
  throw ArgError("unknown CI method '" + std::string(name) + "' (expected student_t or bootstrap)");
}

std::string_view to_string(CiMethod method) {
  return method == CiMethod::student_t ? "student_t" : "bootstrap";
}

Interval99 confidence_interval(std::span<const double> values, double level, CiMethod method,
                               std::size_t resamples, std::uint64_t seed) {
  if (values.size() < 2) throw ArgError("a confidence interval needs at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw ArgError("confidence level must lie in (0, 1)");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;

  if (method == CiMethod::student_t) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double q = boost::math::quantile(dist, 0.5 + 0.5 * level);
    const double half = q * sd / std::sqrt(n);
    return {mean - half, mean + half};
  }

  if (resamples < 2) throw ArgError("bootstrap needs at least 2 resamples");
  rng::Stream stream(rng::derive(seed, {0xb007}));
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[stream.below(values.size())];
    m = s / n;
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - level);
  auto pick = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, resamples - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

namespace {

std::vector<WindowSample> gather(std::span<const WindowSample> windows, std::span<const std::size_t> idx,
                                 std::size_t cap) {
  std::vector<WindowSample> out;
  const std::size_t n = std::min(cap, idx.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(windows[idx[i]]);
  return out;
}

double test_mse(const NetModel& net, const std::optional<physics::IDMParams>& physics,
                std::span<const WindowSample> test) {
  const nn::SampleSet set = to_sample_set(test, net.scaler);
  const std::vector<double> out = nn::predict(net.spec, net.params, set);
  double sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double pred = out[i] + (physics ? physics_prediction(test[i], *physics) : 0.0);
    const double e = pred - test[i].label;
    sum += e * e;
  }
  return sum / static_cast<double>(test.size());
}

}  // namespace

CompareReport compare(const nn::LSTMSpec& direct_spec, const nn::LSTMSpec& perl_spec,
                      std::span<const WindowSample> windows, const CompareConfig& config,
                      std::span<const std::uint64_t> seeds) {
  if (!(direct_spec == perl_spec)) throw ArgError("direct and residual nets must share one architecture");
  nn::validate(direct_spec);
  config.physics.validate();
  if (seeds.empty()) throw ArgError("no seeds given");
  if (config.with_ci && seeds.size() < 2) throw ArgError("confidence intervals need at least 2 seeds");
  if (windows.empty()) throw ArgError("no windows given");
  if (config.val_size < 1 || config.test_size < 1) throw ArgError("val_size and test_size must be >= 1");

  const traj::SplitIndices probe = traj::split_indices(windows.size(), config.fractions, 0);
  const std::size_t train_size = config.train_size.value_or(probe.train.size());
  if (train_size < 1 || train_size > probe.train.size()) {
    throw ArgError("train size " + std::to_string(train_size) + " exceeds the " +
                   std::to_string(probe.train.size()) + " windows in the training split");
  }
  if (probe.val.empty() || probe.test.empty()) throw ArgError("validation and test splits must be nonempty");

  CompareReport report;
  report.runs.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    const std::uint64_t seed = seeds[s];
    const traj::SplitIndices idx = traj::split_indices(windows.size(), config.fractions, rng::derive(seed, {0x5e1}));
    const auto train = gather(windows, idx.train, train_size);
    const auto val = gather(windows, idx.val, config.val_size);
    const auto test = gather(windows, idx.test, config.test_size);
    const FeatureScaler scaler = FeatureScaler::fit(train);

    nn::TrainConfig cfg = config.train;
    cfg.seed = rng::derive(seed, {0x1417e});

    const nn::TrainReport direct =
        nn::train(direct_spec, to_sample_set(train, scaler), to_sample_set(val, scaler), cfg);
    const nn::TrainReport residual =
        nn::train(perl_spec, to_sample_set(residual_labels(train, config.physics), scaler),
                  to_sample_set(residual_labels(val, config.physics), scaler), cfg);

    SeedRun& run = report.runs[s];
    run.seed = seed;
    run.direct_mse = test_mse({direct_spec, direct.final_params, scaler}, std::nullopt, test);
    run.perl_mse = test_mse({perl_spec, residual.final_params, scaler}, config.physics, test);
    run.direct_val_curve = direct.val_loss_curve;
    run.perl_val_curve = residual.val_loss_curve;
  });

  std::vector<double> d;
  std::vector<double> p;
  for (const SeedRun& r : report.runs) {
    d.push_back(r.direct_mse);
    p.push_back(r.perl_mse);
  }
  auto summarize = [&](std::string_view name, const std::vector<double>& v, std::uint64_t tag) {
    ModelSummary m;
    m.model = name;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (config.with_ci) {
      m.ci = confidence_interval(v, config.ci_level, config.ci_method, config.bootstrap_resamples,
                                 rng::derive(seeds.front(), {tag}));
    }
    return m;
  };
  report.direct = summarize("direct", d, 0xd1);
  report.perl = summarize("perl", p, 0xe1);
  return report;
}

}  // namespace plab::perl
