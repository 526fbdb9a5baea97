#include "plab/statbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plab/errors.hpp"
#include "plab/parallel.hpp"

namespace plab::stats {

namespace {

void check_c(double c) {
  if (!(c > 0.0)) throw ArgError("loss range c must be > 0");
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgError("delta must lie in (0, 1)");
}

}  // namespace

double hoeffding_tail(std::size_t n, double t, double c) {
  check_c(c);
  if (!(t > 0.0)) throw ArgError("t must be > 0");
  return 2.0 * std::exp(-2.0 * static_cast<double>(n) * t * t / (c * c));
}

double estimation_tail(std::size_t n, double eps, double c) {
  check_c(c);
  if (!(eps > 0.0)) throw ArgError("eps must be > 0");
  return 4.0 * std::exp(-static_cast<double>(n) * eps * eps / (2.0 * c * c));
}

std::size_t required_sample_size(double c, double eps, double delta) {
  if (!(eps > 0.0)) throw ArgError("eps must be > 0");
  check_delta(delta);
  if (!(c >= 0.0)) throw ArgError("loss range c must be >= 0");
  const double raw = std::ceil(c * c / (2.0 * eps * eps) * std::log(4.0 / delta));
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

double loss_lipschitz(double C, double L) {
  if (!(C >= 0.0) || !(L >= 0.0)) throw ArgError("C and L must be >= 0");
  return 4.0 * C * L;
}

double generalization_bound(double C, double L, double rad, double c, double delta, std::size_t n) {
  check_delta(delta);
  if (n < 1) throw ArgError("n must be >= 1");
  if (!(C >= 0.0) || !(L >= 0.0) || !(rad >= 0.0) || !(c >= 0.0)) {
    throw ArgError("C, L, rad and c must be >= 0");
  }
  return 8.0 * C * L * rad + c * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

// ------------------------------------------------------------ Rademacher ----

std::string_view to_string(InnerMethod method) {
  return method == InnerMethod::enumerate ? "enumerate" : "optimize";
}

namespace {

// Values of every member at every x, member-major.
std::vector<std::vector<double>> member_table(const FiniteClass& cls, std::span<const double> xs) {
  if (cls.members.empty()) throw ArgError("function class is empty");
  if (xs.empty()) throw ArgError("no inputs given");
  std::vector<std::vector<double>> table;
  table.reserve(cls.members.size());
  for (const auto& f : cls.members) {
    std::vector<double> row(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) row[i] = f(xs[i]);
    table.push_back(std::move(row));
  }
  return table;
}

double finite_sup(const std::vector<std::vector<double>>& table, std::span<const int> sigma) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : table) {
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) s += sigma[i] * row[i];
    best = std::max(best, s / static_cast<double>(row.size()));
  }
  return best;
}

RademacherEstimate summarize(const std::vector<double>& sups, InnerMethod method) {
  RademacherEstimate est;
  est.sigma_draws = sups.size();
  est.inner_method = method;
  double mean = 0.0;
  for (double v : sups) mean += v;
  mean /= static_cast<double>(sups.size());
  double ss = 0.0;
  for (double v : sups) ss += (v - mean) * (v - mean);
  const double sd = sups.size() > 1 ? std::sqrt(ss / static_cast<double>(sups.size() - 1)) : 0.0;
  est.value = mean;
  est.std_error = sd / std::sqrt(static_cast<double>(sups.size()));
  return est;
}

std::vector<int> draw_signs(std::size_t n, std::uint64_t seed, std::size_t draw) {
  rng::Stream stream(rng::derive(seed, {0x5167, draw}));
  std::vector<int> sigma(n);
  for (auto& s : sigma) s = stream.sign();
  return sigma;
}

}  // namespace

RademacherEstimate empirical_rademacher(const FiniteClass& cls, std::span<const double> xs,
                                        std::size_t sigma_draws, std::uint64_t seed) {
  if (sigma_draws < 1) throw ArgError("sigma_draws must be >= 1");
  const auto table = member_table(cls, xs);
  std::vector<double> sups(sigma_draws);
  for (std::size_t d = 0; d < sigma_draws; ++d) {
    sups[d] = finite_sup(table, draw_signs(xs.size(), seed, d));
  }
  return summarize(sups, InnerMethod::enumerate);
}

RademacherEstimate empirical_rademacher(const ParametricClass& cls, std::span<const double> xs,
                                        std::size_t sigma_draws, std::uint64_t seed) {
  if (sigma_draws < 1) throw ArgError("sigma_draws must be >= 1");
  if (xs.empty()) throw ArgError("no inputs given");
  if (cls.dim < 1 || !cls.eval || cls.lower.size() != cls.dim || cls.upper.size() != cls.dim) {
    throw ArgError("parametric class needs eval and box bounds of size dim");
  }
  for (std::size_t k = 0; k < cls.dim; ++k) {
    if (!(cls.lower[k] <= cls.upper[k])) throw ArgError("parameter box has lower > upper");
  }
  if (cls.restarts < 1) throw ArgError("parametric class needs at least one restart");

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<double> sups(sigma_draws);
  parallel_for(sigma_draws, [&](std::size_t d) {
    const std::vector<int> sigma = draw_signs(xs.size(), seed, d);
    auto objective = [&](std::span<const double> theta) {
      double s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) s += sigma[i] * cls.eval(theta, xs[i]);
      return s * inv_n;
    };
    rng::Stream stream(rng::derive(seed, {0x0a5c, d}));
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> theta(cls.dim);
    std::vector<double> grad(cls.dim);
    for (std::size_t r = 0; r < cls.restarts; ++r) {
      for (std::size_t k = 0; k < cls.dim; ++k) theta[k] = stream.uniform(cls.lower[k], cls.upper[k]);
      double value = objective(theta);
      for (std::size_t step = 0; step < cls.ascent_steps; ++step) {
        for (std::size_t k = 0; k < cls.dim; ++k) {
          const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
          const double keep = theta[k];
          theta[k] = keep + h;
          const double up = objective(theta);
          theta[k] = keep - h;
          const double down = objective(theta);
          theta[k] = keep;
          grad[k] = (up - down) / (2.0 * h);
        }
        for (std::size_t k = 0; k < cls.dim; ++k) {
          theta[k] = std::clamp(theta[k] + cls.step * grad[k], cls.lower[k], cls.upper[k]);
        }
        value = std::max(value, objective(theta));
      }
      best = std::max(best, value);
    }
    sups[d] = best;
  });
  return summarize(sups, InnerMethod::optimize);
}

double exact_rademacher(const FiniteClass& cls, std::span<const double> xs) {
  if (xs.size() > 24) throw ArgError("exact enumeration supports at most 24 inputs");
  const auto table = member_table(cls, xs);
  const std::size_t n = xs.size();
  const std::size_t patterns = std::size_t{1} << n;
  std::vector<int> sigma(n);
  double total = 0.0;
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t i = 0; i < n; ++i) sigma[i] = (mask >> i) & 1U ? 1 : -1;
    total += finite_sup(table, sigma);
  }
  return total / static_cast<double>(patterns);
}

// ------------------------------------------------------- ERM chain check ----

ChainReport erm_chain_check(const LossClass& cls, const Sampler& sampler, std::size_t n, double t,
                            std::size_t trials, std::uint64_t seed, std::size_t population_size) {
  if (cls.members.empty()) throw ArgError("loss class is empty");
  if (n < 1 || trials < 1 || population_size < 1) throw ArgError("n, trials and population size must be >= 1");
  const std::size_t m = cls.members.size();

  std::vector<double> population(m, 0.0);
  {
    rng::Stream stream(rng::derive(seed, {0x9091}));
    for (std::size_t i = 0; i < population_size; ++i) {
      const double z = sampler(stream);
      for (std::size_t j = 0; j < m; ++j) population[j] += cls.members[j](z);
    }
    for (auto& r : population) r /= static_cast<double>(population_size);
  }
  const std::size_t best = static_cast<std::size_t>(
      std::min_element(population.begin(), population.end()) - population.begin());

  std::vector<unsigned char> chain(trials, 0);
  std::vector<unsigned char> middle(trials, 0);
  parallel_for(trials, [&](std::size_t trial) {
    rng::Stream stream(rng::derive(seed, {0x7121, trial}));
    std::vector<double> empirical(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = sampler(stream);
      for (std::size_t j = 0; j < m; ++j) empirical[j] += cls.members[j](z);
    }
    for (auto& r : empirical) r /= static_cast<double>(n);
    const std::size_t erm = static_cast<std::size_t>(
        std::min_element(empirical.begin(), empirical.end()) - empirical.begin());
    const bool mid = empirical[erm] <= empirical[best];
    const bool holds = population[erm] <= empirical[erm] + t && mid &&
                       empirical[best] + t <= population[best] + 2.0 * t;
    chain[trial] = holds ? 1 : 0;
    middle[trial] = mid ? 1 : 0;
  });

  ChainReport report;
  report.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    report.chain_holds += chain[i];
    report.middle_holds += middle[i];
  }
  report.frequency = static_cast<double>(report.chain_holds) / static_cast<double>(trials);
  report.middle_frequency = static_cast<double>(report.middle_holds) / static_cast<double>(trials);
  report.confidence = std::max(0.0, 1.0 - 2.0 * hoeffding_tail(n, t, cls.c));
  report.std_error =
      std::sqrt(report.confidence * (1.0 - report.confidence) / static_cast<double>(trials));
  return report;
}

double max_loss_quotient(const ScalarTarget& f, const ScalarTarget& g, std::size_t pairs, std::uint64_t seed) {
  if (!(f.interval() == g.interval())) throw DomainError("f and g live on different intervals");
  const Interval& iv = f.interval();
  auto loss = [&](double s) {
    const double d = f(s) - g(s);
    return d * d;
  };
  rng::Stream stream(rng::derive(seed, {0x4c51}));
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double s = stream.uniform(iv.a(), iv.b());
    const double u = stream.uniform(iv.a(), iv.b());
    if (s == u) continue;
    worst = std::max(worst, std::abs(loss(s) - loss(u)) / std::abs(s - u));
  }
  return worst;
}

// ---------------------------------------------------------- error report ----

namespace {

std::vector<double> uniform_points(const Interval& iv, std::size_t n, std::uint64_t seed) {
  rng::Stream stream(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = stream.uniform(iv.a(), iv.b());
  return xs;
}

double risk(const Predictor& predictor, const ScalarTarget& target, std::span<const double> xs) {
  const std::vector<double> pred = predictor(xs);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = pred[i] - target(xs[i]);
    sum += e * e;
  }
  const double r = sum / static_cast<double>(xs.size());
  if (!std::isfinite(r)) throw TrainError("fitted predictor produced a non-finite risk", 0);
  return r;
}

}  // namespace

ErrorReport measure_errors(const Trainer& trainer, const ScalarTarget& target, std::size_t n_train,
                           std::size_t n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw ArgError("n_train and n_test must be >= 1");
  const Interval& iv = target.interval();
  const std::vector<double> xs = uniform_points(iv, n_train, rng::derive(seed, {0x5a, n_train}));
  std::vector<double> ys(n_train);
  for (std::size_t i = 0; i < n_train; ++i) ys[i] = target(xs[i]);
  const Predictor predictor = trainer(xs, ys, iv, rng::derive(seed, {0x7a, n_train}));

  const std::vector<double> test = uniform_points(iv, n_test, rng::derive(seed, {0x7e, n_test}));
  ErrorReport report;
  report.n_train = n_train;
  report.train_risk = risk(predictor, target, xs);
  report.test_risk = risk(predictor, target, test);
  report.gen_error = report.test_risk - report.train_risk;
  report.est_error = report.test_risk;
  return report;
}

Trainer mlp_trainer(const MlpTrainerConfig& config) {
  return [config](std::span<const double> xs, std::span<const double> ys, const Interval& iv,
                  std::uint64_t seed) -> Predictor {
    std::vector<std::size_t> widths{1};
    widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
    widths.push_back(1);
    const nn::NetSpec spec = nn::MLPSpec{widths};

    const double mid = 0.5 * (iv.a() + iv.b());
    const double half = 0.5 * iv.width();
    auto to_sample_set = [mid, half](std::span<const double> points) {
      nn::SampleSet set(1, 1);
      set.reserve(points.size());
      for (double x : points) {
        const double u = (x - mid) / half;
        set.add(std::span<const double>(&u, 1), 0.0);
      }
      return set;
    };

    nn::SampleSet data = to_sample_set(xs);
    for (std::size_t i = 0; i < ys.size(); ++i) data.set_target(i, ys[i]);
    nn::TrainConfig cfg = config.train;
    cfg.seed = seed;
    const std::size_t batches = (xs.size() + cfg.batch_size - 1) / cfg.batch_size;
    cfg.epochs = std::max(cfg.epochs, (config.min_steps + batches - 1) / batches);
    // Every sample is a training sample here; the fit is validated on itself.
    nn::TrainReport report = nn::train(spec, data, data, cfg);

    return [spec, params = std::move(report.final_params), to_sample_set](std::span<const double> points) {
      return nn::predict(spec, params, to_sample_set(points));
    };
  };
}

ErrorTable error_table(const Trainer& trainer, std::span<const std::size_t> sizes, std::size_t seeds,
                       std::uint64_t root_seed, std::size_t n_test) {
  if (sizes.empty() || seeds < 1) throw ArgError("error table needs at least one size and one seed");
  const ScalarTarget f = funcspace::make_builtin("f_demo");
  const ScalarTarget r = funcspace::make_builtin("r_demo");

  ErrorTable table;
  table.runs.resize(sizes.size() * seeds);
  parallel_for(table.runs.size(), [&](std::size_t cell) {
    const std::size_t n = sizes[cell / seeds];
    const std::uint64_t seed = rng::derive(root_seed, {0xe7, cell % seeds});
    ErrorRun& run = table.runs[cell];
    run.n = n;
    run.seed = seed;
    run.direct = measure_errors(trainer, f, n, n_test, seed);
    run.residual = measure_errors(trainer, r, n, n_test, seed);
  });

  for (std::size_t k = 0; k < sizes.size(); ++k) {
    ErrorRow direct{.n = sizes[k], .function = "f"};
    ErrorRow residual{.n = sizes[k], .function = "r"};
    for (std::size_t s = 0; s < seeds; ++s) {
      const ErrorRun& run = table.runs[k * seeds + s];
      direct.gen_error += run.direct.gen_error;
      direct.est_error += run.direct.est_error;
      residual.gen_error += run.residual.gen_error;
      residual.est_error += run.residual.est_error;
    }
    for (ErrorRow* row : {&direct, &residual}) {
      row->gen_error /= static_cast<double>(seeds);
      row->est_error /= static_cast<double>(seeds);
    }
    residual.gen_improvement_pct = 100.0 * (direct.gen_error - residual.gen_error) / direct.gen_error;
    residual.est_improvement_pct = 100.0 * (direct.est_error - residual.est_error) / direct.est_error;
    table.rows.push_back(direct);
    table.rows.push_back(residual);
  }
  return table;
}

}  // namespace plab::stats
