#include <doctest.h>

#include <cmath>
#include <numeric>

#include "plab/errors.hpp"
#include "plab/funcspace.hpp"
#include "plab/statbounds.hpp"

using namespace plab;

TEST_CASE("tail bounds") {
  CHECK(stats::hoeffding_tail(2000, 0.1, 1.0) == doctest::Approx(2.0 * std::exp(-40.0)).epsilon(1e-12));
  CHECK(stats::hoeffding_tail(0, 0.1, 1.0) == 2.0);
  CHECK_THROWS_AS(stats::hoeffding_tail(10, 0.1, 0.0), ArgError);
  CHECK(stats::estimation_tail(2000, 0.1, 1.0) == doctest::Approx(4.0 * std::exp(-10.0)).epsilon(1e-12));
  CHECK(stats::estimation_tail(0, 0.1, 1.0) == 4.0);
  CHECK_THROWS_AS(stats::estimation_tail(10, 0.1, 0.0), ArgError);
  CHECK(stats::clamp_probability(4.0) == 1.0);
  CHECK(stats::clamp_probability(0.25) == 0.25);
}

TEST_CASE("required_sample_size") {
  CHECK(stats::required_sample_size(1.0, 0.1, 0.05) == 220);
  CHECK(stats::required_sample_size(0.5, 0.1, 0.05) == 55);
  CHECK(stats::required_sample_size(0.0, 0.1, 0.05) == 1);
  CHECK_THROWS_AS(stats::required_sample_size(1.0, 0.1, 1.0), ArgError);
  CHECK_THROWS_AS(stats::required_sample_size(1.0, 0.1, 0.0), ArgError);
  // Monotone in c, eps and delta.
  CHECK(stats::required_sample_size(2.0, 0.1, 0.05) > 220);
  CHECK(stats::required_sample_size(1.0, 0.05, 0.05) > 220);
  CHECK(stats::required_sample_size(1.0, 0.1, 0.01) > 220);
}

TEST_CASE("loss Lipschitz and generalization bound") {
  CHECK(stats::loss_lipschitz(1.0, 1.0) == 4.0);
  CHECK(stats::loss_lipschitz(3.0, 0.0) == 0.0);
  CHECK(stats::generalization_bound(1.0, 1.0, 0.05, 1.0, 0.05, 1000) == doctest::Approx(0.43870).epsilon(1e-5));
  CHECK(stats::generalization_bound(1.0, 1.0, 0.0, 0.0, 0.05, 1000) == 0.0);
  CHECK_THROWS_AS(stats::generalization_bound(1.0, 1.0, 0.05, 1.0, 1.0, 1000), ArgError);
}

namespace {

stats::FiniteClass plus_minus() { return {{[](double) { return 1.0; }, [](double) { return -1.0; }}}; }

// E|sum sigma_i| / n by direct counting over binomial coefficients.
double plus_minus_oracle(int n) {
  double total = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    total += binom * std::abs(2 * k - n);
    binom = binom * (n - k) / (k + 1);
  }
  return total / std::pow(2.0, n) / n;
}

}  // namespace

TEST_CASE("Rademacher complexity of the +-1 class") {
  std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  CHECK(stats::exact_rademacher(plus_minus(), xs) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
  CHECK(stats::exact_rademacher(plus_minus(), std::span(xs).first(1)) == 1.0);
  for (int n : {1, 2, 4, 8}) {
    std::vector<double> pts(n, 0.5);
    const double exact = stats::exact_rademacher(plus_minus(), pts);
    CHECK(exact == doctest::Approx(plus_minus_oracle(n)).epsilon(1e-12));
    const auto est = stats::empirical_rademacher(plus_minus(), pts, 10000, 7);
    CHECK(est.inner_method == stats::InnerMethod::enumerate);
    CHECK(std::abs(est.value - exact) <= 3.0 * est.std_error + 1e-12);
  }
  stats::FiniteClass zero{{[](double) { return 0.0; }}};
  CHECK(stats::empirical_rademacher(zero, xs, 100, 1).value == 0.0);
  CHECK_THROWS_AS(stats::empirical_rademacher(zero, std::vector<double>{}, 100, 1), ArgError);
  CHECK_THROWS_AS(stats::empirical_rademacher(stats::FiniteClass{}, xs, 100, 1), ArgError);
}

TEST_CASE("parametric Rademacher is a lower bound near the finite value") {
  // theta in [-1, 1] times a constant: sup over theta of theta * sum sigma equals |sum sigma|.
  stats::ParametricClass cls;
  cls.dim = 1;
  cls.eval = [](std::span<const double> th, double) { return th[0]; };
  cls.lower = {-1.0};
  cls.upper = {1.0};
  std::vector<double> xs(4, 0.0);
  const auto est = stats::empirical_rademacher(cls, xs, 2000, 3);
  CHECK(est.inner_method == stats::InnerMethod::optimize);
  CHECK(est.value <= 3.0 / 8.0 + 4.0 * est.std_error);
  CHECK(est.value >= 3.0 / 8.0 - 4.0 * est.std_error);
}

TEST_CASE("Rademacher estimate is seed-deterministic") {
  std::vector<double> xs{0.1, 0.2, 0.3};
  const auto a = stats::empirical_rademacher(plus_minus(), xs, 500, 11);
  const auto b = stats::empirical_rademacher(plus_minus(), xs, 500, 11);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("ERM chain check") {
  const stats::Sampler uniform = [](rng::Stream& s) { return s.uniform(); };
  stats::LossClass one{{[](double z) { return z; }}, 1.0};
  const auto single = stats::erm_chain_check(one, uniform, 20, 0.05, 200, 1, 20000);
  CHECK(single.middle_frequency == 1.0);

  stats::LossClass three{{[](double z) { return z; }, [](double z) { return 1.0 - z; },
                          [](double z) { return z * z; }},
                         1.0};
  const auto wide = stats::erm_chain_check(three, uniform, 10, 1.5, 200, 2, 20000);
  CHECK(wide.frequency == 1.0);

  const auto rep = stats::erm_chain_check(three, uniform, 50, 0.2, 2000, 3, 50000);
  CHECK(rep.confidence == doctest::Approx(1.0 - 4.0 * std::exp(-4.0)).epsilon(1e-12));
  CHECK(rep.meets_confidence());
  CHECK_THROWS_AS(stats::erm_chain_check(stats::LossClass{}, uniform, 10, 0.1, 10, 1), ArgError);
}

TEST_CASE("loss difference quotients stay under 4CL") {
  const ScalarTarget r = funcspace::make_builtin("r_demo");
  const ScalarTarget zero("zero", [](double) { return 0.0; }, r.interval());
  const double q = stats::max_loss_quotient(r, zero, 10000, 5);
  CHECK(q <= stats::loss_lipschitz(1.0, 1.0));
  // l = sin^2 has slope sin 2x, so the sampled maximum approaches 1.
  CHECK(q > 0.99);
  const ScalarTarget other("other", [](double) { return 0.0; }, Interval(0.0, 1.0));
  CHECK_THROWS_AS(stats::max_loss_quotient(r, other, 10, 1), DomainError);
}

TEST_CASE("measure_errors on the zero target") {
  const stats::Trainer zero_fit = [](std::span<const double>, std::span<const double>, const Interval&,
                                     std::uint64_t) -> stats::Predictor {
    return [](std::span<const double> xs) { return std::vector<double>(xs.size(), 0.0); };
  };
  const ScalarTarget zero("zero", [](double) { return 0.0; }, Interval(0.0, 1.0));
  const auto rep = stats::measure_errors(zero_fit, zero, 10, 1000, 1);
  CHECK(rep.gen_error == 0.0);
  CHECK(rep.est_error == 0.0);
  CHECK(rep.train_risk == 0.0);

  const stats::Trainer nan_fit = [](std::span<const double>, std::span<const double>, const Interval&,
                                    std::uint64_t) -> stats::Predictor {
    return [](std::span<const double> xs) { return std::vector<double>(xs.size(), NAN); };
  };
  CHECK_THROWS_AS(stats::measure_errors(nan_fit, zero, 10, 100, 1), TrainError);
}

TEST_CASE("mlp trainer fits the residual better than the direct target at n = 10") {
  stats::MlpTrainerConfig cfg;
  cfg.hidden = {32, 32};
  cfg.train.epochs = 150;
  const std::vector<std::size_t> sizes{10};
  const stats::ErrorTable table = stats::error_table(stats::mlp_trainer(cfg), sizes, 5, 1, 5000);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].function == "f");
  CHECK(table.rows[1].function == "r");
  CHECK(table.runs.size() == 5);
  CHECK(table.rows[1].est_error < table.rows[0].est_error);
  const double mean_est_f = std::accumulate(table.runs.begin(), table.runs.end(), 0.0,
                                            [](double s, const stats::ErrorRun& r) { return s + r.direct.est_error; }) /
                            5.0;
  CHECK(table.rows[0].est_error == doctest::Approx(mean_est_f).epsilon(1e-12));
}
