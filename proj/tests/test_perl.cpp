#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "plab/errors.hpp"
#include "plab/perl.hpp"

using namespace plab;
using traj::WindowSample;

namespace {

WindowSample window_ending_in(double v, double v_lead, double s, double history = 0.0) {
  WindowSample w;
  w.k = 3;
  w.features.assign(3 * traj::kChannels, history);
  const std::size_t last = 2 * traj::kChannels;
  w.features[last + 0] = v;
  w.features[last + 2] = v_lead;
  w.features[last + 4] = s;
  for (std::size_t t = 0; t < 2; ++t) w.features[t * traj::kChannels + 4] = 5.0 + history;
  return w;
}

std::vector<WindowSample> synthetic_windows(double sigma, std::uint64_t seed, double duration = 300.0,
                                            std::size_t k = 10) {
  traj::SynthConfig c;
  c.duration = duration;
  c.accel_noise_sigma = sigma;
  c.seed = seed;
  return traj::make_windows(traj::synth_generate(c), k);
}

}  // namespace

TEST_CASE("physics prediction uses the last step only") {
  const physics::IDMParams p;
  CHECK(perl::physics_prediction(window_ending_in(0.0, 0.0, p.s0), p) == 0.0);
  CHECK(perl::physics_prediction(window_ending_in(10.0, 10.0, 20.0), p) ==
        physics::idm_accel({10.0, 10.0, 20.0}, p));
  CHECK(perl::physics_prediction(window_ending_in(10.0, 10.0, 20.0), p) == doctest::Approx(0.30052).epsilon(1e-4));
  CHECK(perl::physics_prediction(window_ending_in(9.0, 8.0, 15.0, 1.0), p) ==
        perl::physics_prediction(window_ending_in(9.0, 8.0, 15.0, 2.0), p));

  WindowSample broken = window_ending_in(1.0, 1.0, 5.0);
  broken.features.pop_back();
  CHECK_THROWS_AS(perl::physics_prediction(broken, p), ShapeError);
}

TEST_CASE("residual labels") {
  const physics::IDMParams p;
  const auto perfect = synthetic_windows(0.0, 1);
  for (const auto& w : perl::residual_labels(perfect, p)) CHECK(std::abs(w.label) <= 1e-12);

  const auto noisy = synthetic_windows(0.1, 2, 600.0);
  const auto res = perl::residual_labels(noisy, p);
  double mean = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    CHECK(res[i].label + perl::physics_prediction(noisy[i], p) == doctest::Approx(noisy[i].label).epsilon(1e-15));
    CHECK(res[i].features == noisy[i].features);
    mean += res[i].label;
  }
  mean /= static_cast<double>(res.size());
  double var = 0.0;
  for (const auto& w : res) var += (w.label - mean) * (w.label - mean);
  const double sd = std::sqrt(var / static_cast<double>(res.size()));
  CHECK(sd == doctest::Approx(0.1).epsilon(0.2));

  // The residual label range is narrower than the raw one.
  auto range = [](const std::vector<WindowSample>& ws) {
    const auto [lo, hi] = std::minmax_element(ws.begin(), ws.end(), [](auto& a, auto& b) { return a.label < b.label; });
    return hi->label - lo->label;
  };
  CHECK(range(res) < range(noisy));
}

TEST_CASE("physics-only MSE sits at the noise floor on well-specified data") {
  const physics::IDMParams p;
  const auto noisy = synthetic_windows(0.1, 9, 600.0);
  const auto samples = perl::calibration_samples(noisy);
  CHECK(physics::acceleration_mse(samples, p) == doctest::Approx(0.01).epsilon(0.3));
}

TEST_CASE("feature scaler") {
  const auto ws = synthetic_windows(0.05, 3, 60.0);
  const auto s = perl::FeatureScaler::fit(ws);
  const auto set = perl::to_sample_set(ws, s);
  for (std::size_t c = 0; c < traj::kChannels; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (std::size_t t = 0; t < set.steps(); ++t) {
        sum += set.input(i)[t * traj::kChannels + c];
        ++n;
      }
    }
    CHECK(std::abs(sum / static_cast<double>(n)) <= 1e-9);
  }
  const auto id = perl::FeatureScaler::identity();
  CHECK(perl::to_sample_set(ws, id).input(0)[0] == ws[0].features[0]);
}

TEST_CASE("PERL prediction is physics plus residual") {
  const physics::IDMParams p;
  const nn::LSTMSpec spec{traj::kChannels, 4, 1};
  perl::PERLModel model = perl::PERLModel::with_zero_residual(p, spec);
  const WindowSample w = window_ending_in(12.0, 11.0, 25.0, 0.3);
  CHECK(perl::predict(model, w) == perl::physics_prediction(w, p));
  // Only the head bias is set: the residual net outputs that constant.
  model.residual.params.back() = 0.5;
  CHECK(perl::predict(model, w) == doctest::Approx(perl::physics_prediction(w, p) + 0.5).epsilon(1e-15));

  model.residual.params.pop_back();
  CHECK_THROWS_AS(perl::predict(model, w), ShapeError);
}

TEST_CASE("confidence intervals") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto t = perl::confidence_interval(v, 0.99, perl::CiMethod::student_t);
  // t_{0.995, 4} = 4.604094871
  const double half = 4.604094871 * std::sqrt(2.5) / std::sqrt(5.0);
  CHECK(t.low == doctest::Approx(3.0 - half).epsilon(1e-8));
  CHECK(t.high == doctest::Approx(3.0 + half).epsilon(1e-8));

  const auto b = perl::confidence_interval(v, 0.99, perl::CiMethod::bootstrap, 5000, 1);
  CHECK(b.low < 3.0);
  CHECK(b.high > 3.0);
  CHECK(b.low >= 1.0);
  CHECK(b.high <= 5.0);
  const auto b2 = perl::confidence_interval(v, 0.99, perl::CiMethod::bootstrap, 5000, 1);
  CHECK(b.low == b2.low);

  CHECK_THROWS_AS(perl::confidence_interval(std::vector<double>{1.0}, 0.99, perl::CiMethod::student_t), ArgError);
  CHECK(perl::parse_ci_method("bootstrap") == perl::CiMethod::bootstrap);
  CHECK_THROWS_AS(perl::parse_ci_method("wald"), ArgError);
}

TEST_CASE("compare on perfect-physics data") {
  const auto ws = synthetic_windows(0.0, 4, 200.0, 5);
  const nn::LSTMSpec spec{traj::kChannels, 4, 1};
  perl::CompareConfig cfg;
  cfg.train_size = 100;
  cfg.test_size = 100;
  cfg.train.epochs = 60;
  cfg.train.learning_rate = 1e-2;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto rep = perl::compare(spec, spec, ws, cfg, seeds);
  REQUIRE(rep.runs.size() == 3);
  for (const auto& r : rep.runs) {
    CHECK(r.perl_mse <= 1e-4);
    CHECK(r.direct_mse > r.perl_mse);
    CHECK(r.direct_val_curve.size() == 60);
  }
  REQUIRE(rep.perl.ci);
  CHECK(rep.perl.ci->low <= rep.perl.mean);
  CHECK(rep.perl.mean < rep.direct.mean);

  const auto again = perl::compare(spec, spec, ws, cfg, seeds);
  CHECK(again.runs[1].direct_mse == rep.runs[1].direct_mse);

  cfg.with_ci = false;
  const std::vector<std::uint64_t> one{5};
  const auto single = perl::compare(spec, spec, ws, cfg, one);
  CHECK(!single.direct.ci);
  CHECK(single.direct.mean == single.runs[0].direct_mse);

  cfg.with_ci = true;
  CHECK_THROWS_AS(perl::compare(spec, spec, ws, cfg, one), ArgError);
  CHECK_THROWS_AS(perl::compare(spec, nn::LSTMSpec{traj::kChannels, 8, 1}, ws, cfg, seeds), ArgError);
  cfg.train_size = 100000;
  CHECK_THROWS_AS(perl::compare(spec, spec, ws, cfg, seeds), ArgError);
}

TEST_CASE("a trained residual beats the untrained one on perfect-physics data") {
  const physics::IDMParams p;
  const auto ws = synthetic_windows(0.0, 6, 200.0, 5);
  const nn::LSTMSpec spec{traj::kChannels, 4, 1};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto parts = traj::split(ws, {}, seed);
    const auto scaler = perl::FeatureScaler::fit(parts.train);
    nn::TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = seed;
    const auto trained = nn::train(spec, perl::to_sample_set(perl::residual_labels(parts.train, p), scaler),
                                   perl::to_sample_set(perl::residual_labels(parts.val, p), scaler), cfg);
    const perl::PERLModel base{p, {spec, nn::init(spec, seed), scaler}};
    const perl::PERLModel fit{p, {spec, trained.final_params, scaler}};
    double mse_base = 0.0;
    double mse_fit = 0.0;
    for (const auto& w : parts.test) {
      mse_base += std::pow(perl::predict(base, w) - w.label, 2);
      mse_fit += std::pow(perl::predict(fit, w) - w.label, 2);
    }
    CHECK(mse_fit <= mse_base);
  }
}
