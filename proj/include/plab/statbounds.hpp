#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "plab/funcspace.hpp"
#include "plab/neural.hpp"
#include "plab/rng.hpp"

namespace plab::stats {

// 2 exp(-2 n t^2 / c^2). Raw bound, may exceed 1.
double hoeffding_tail(std::size_t n, double t, double c);

// 4 exp(-n eps^2 / (2 c^2)).
double estimation_tail(std::size_t n, double eps, double c);

// max(1, ceil(c^2 / (2 eps^2) * ln(4 / delta))).
std::size_t required_sample_size(double c, double eps, double delta);

// 4 C L
double loss_lipschitz(double C, double L);

// 8 C L rad + c sqrt(ln(1/delta) / (2n))
double generalization_bound(double C, double L, double rad, double c, double delta, std::size_t n);

// Display helper for the raw bounds.
inline double clamp_probability(double p) { return p > 1.0 ? 1.0 : p; }

// ------------------------------------------------------------ Rademacher ----

using RealFn = std::function<double(double)>;

struct FiniteClass {
  std::vector<RealFn> members;
};

// x -> eval(theta, x) with theta in a box. The inner supremum is found by
// projected gradient ascent from several seeded starts, so the estimate is a
// lower bound on the true complexity.
struct ParametricClass {
  std::size_t dim = 1;
  std::function<double(std::span<const double> theta, double x)> eval;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t restarts = 5;
  std::size_t ascent_steps = 200;
  double step = 0.1;
};

enum class InnerMethod { enumerate, optimize };

std::string_view to_string(InnerMethod method);

struct RademacherEstimate {
  double value = 0.0;
  std::size_t sigma_draws = 0;
  double std_error = 0.0;  // sample std of the per-draw suprema / sqrt(draws)
  InnerMethod inner_method = InnerMethod::enumerate;
};

RademacherEstimate empirical_rademacher(const FiniteClass& cls, std::span<const double> xs,
                                        std::size_t sigma_draws, std::uint64_t seed);
RademacherEstimate empirical_rademacher(const ParametricClass& cls, std::span<const double> xs,
                                        std::size_t sigma_draws, std::uint64_t seed);

// Average of the supremum over all 2^n sign patterns (n <= 24).
double exact_rademacher(const FiniteClass& cls, std::span<const double> xs);

// ------------------------------------------------------- ERM chain check ----

// Members are loss functions z -> [0, c] of a sampled datum z.
struct LossClass {
  std::vector<RealFn> members;
  double c = 1.0;
};

using Sampler = std::function<double(rng::Stream&)>;

struct ChainReport {
  std::size_t trials = 0;
  std::size_t chain_holds = 0;
  std::size_t middle_holds = 0;  // R_hat(f_hat) <= R_hat(f*)
  double frequency = 0.0;
  double middle_frequency = 0.0;
  double confidence = 0.0;  // 1 - 2 hoeffding_tail(n, t, c), floored at 0
  double std_error = 0.0;   // binomial std error at `confidence`

  bool meets_confidence() const { return frequency >= confidence - 3.0 * std_error; }
};

// Each trial draws n samples, picks the empirical risk minimizer and checks
// R(f_hat) <= R_hat(f_hat) + t <= R_hat(f*) + t <= R(f*) + 2t. Population
// risks come from a separate sample of population_size draws.
ChainReport erm_chain_check(const LossClass& cls, const Sampler& sampler, std::size_t n, double t,
                            std::size_t trials, std::uint64_t seed, std::size_t population_size = 200000);

// Largest |l(s) - l(s')| / |s - s'| over random pairs in the interval, with
// l(s) = (f(s) - g(s))^2.
double max_loss_quotient(const ScalarTarget& f, const ScalarTarget& g, std::size_t pairs, std::uint64_t seed);

// ---------------------------------------------------------- error report ----

using Predictor = std::function<std::vector<double>(std::span<const double> xs)>;
using Trainer = std::function<Predictor(std::span<const double> xs, std::span<const double> ys,
                                        const Interval& interval, std::uint64_t seed)>;

struct ErrorReport {
  std::size_t n_train = 0;
  double gen_error = 0.0;  // test_risk - train_risk
  double est_error = 0.0;  // test_risk - 0
  double train_risk = 0.0;
  double test_risk = 0.0;
};

// Fits on n_train uniform samples of the target and scores on n_test fresh
// ones. The sample positions depend only on (seed, n_train), so two targets
// on the same interval see the same inputs.
ErrorReport measure_errors(const Trainer& trainer, const ScalarTarget& target, std::size_t n_train,
                           std::size_t n_test, std::uint64_t seed);

struct MlpTrainerConfig {
  std::vector<std::size_t> hidden{128, 64};
  nn::TrainConfig train{.learning_rate = 1e-3, .epochs = 300, .batch_size = 32, .seed = 0,
                        .optimizer = nn::Optimizer::adam, .final_lr_fraction = 0.01};
  // Small training sets get extra epochs until at least this many optimizer
  // steps are taken, so the fit approaches the empirical risk minimizer.
  std::size_t min_steps = 0;
};

// ReLU MLP on inputs rescaled to [-1, 1]. The config seed is replaced by the
// per-run seed.
Trainer mlp_trainer(const MlpTrainerConfig& config);

struct ErrorRow {
  std::size_t n = 0;
  std::string_view function;  // "f" (direct fit of f_demo) or "r" (residual fit of r_demo)
  double gen_error = 0.0;
  double est_error = 0.0;
  double gen_improvement_pct = 0.0;  // 0 for the f rows
  double est_improvement_pct = 0.0;
};

struct ErrorRun {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  ErrorReport direct;
  ErrorReport residual;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;  // means over seeds, two rows per n
  std::vector<ErrorRun> runs;
};

// Direct fit of f_demo against the residual fit of r_demo for every
// (n, seed); seeds derive from root_seed and run in parallel.
ErrorTable error_table(const Trainer& trainer, std::span<const std::size_t> sizes, std::size_t seeds,
                       std::uint64_t root_seed, std::size_t n_test = 100000);

}  // namespace plab::stats
