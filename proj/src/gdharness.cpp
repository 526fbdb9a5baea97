#include "plab/gdharness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "plab/errors.hpp"

namespace plab::gd {

StopCriterion parse_stop_criterion(std::string_view name) {
  if (name == "value_gap") return StopCriterion::value_gap;
  if (name == "iterate_step") return StopCriterion::iterate_step;
  throw ArgError("unknown stop criterion '" + std::string(name) + "'");
}

void GDConfig::validate() const {
  if (const auto* c = std::get_if<ConstantStep>(&schedule); c && !(c->eta > 0.0)) {
    throw ArgError("step size must be > 0");
  }
  if (max_iters < 1) throw ArgError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw ArgError("tol must be > 0");
  if (!std::isfinite(x0)) throw ArgError("x0 must be finite");
}

GDTrace run_gd(const Objective& objective, const GDConfig& config) {
  config.validate();
  const ScalarTarget& f = objective.target;
  const Interval& iv = f.interval();

  GDTrace trace;
  trace.f_star = objective.f_star;
  trace.radius = std::max(std::abs(iv.a() - objective.x_star), std::abs(iv.b() - objective.x_star));
  trace.horizon = config.max_iters;
  trace.iterates.reserve(config.max_iters + 1);
  trace.values.reserve(config.max_iters + 1);

  double x = iv.clamp(config.x0);
  trace.iterates.push_back(x);
  trace.values.push_back(f(x));

  for (std::size_t t = 1; t <= config.max_iters; ++t) {
    const double grad = f.derivative(x);
    if (!std::isfinite(grad)) {
      throw DivergedError("non-finite gradient at iteration " + std::to_string(t));
    }
    const double eta = std::holds_alternative<ConstantStep>(config.schedule)
                           ? std::get<ConstantStep>(config.schedule).eta
                           : 1.0 / std::sqrt(static_cast<double>(t));
    const double next = iv.clamp(x - eta * grad);
    const double value = f(next);
    trace.iterates.push_back(next);
    trace.values.push_back(value);

    if (!trace.iterations_to_tol) {
      const bool met = config.stop_on == StopCriterion::value_gap
                           ? value - objective.f_star <= config.tol
                           : std::abs(next - x) <= config.tol;
      if (met) trace.iterations_to_tol = t;
    }
    x = next;
  }
  return trace;
}

double avg_gap(const GDTrace& trace) {
  const std::size_t count = std::min(trace.horizon, trace.values.size());
  if (count == 0) throw ArgError("avg_gap of an empty trace");
  double sum = 0.0;
  for (std::size_t t = 0; t < count; ++t) sum += trace.values[t] - trace.f_star;
  return sum / static_cast<double>(count);
}

double constant_step_bound(double radius, double lipschitz, double eta, std::size_t iters) {
  if (!(eta > 0.0)) throw ArgError("step size must be > 0");
  if (iters < 1) throw ArgError("T must be >= 1");
  if (!(radius >= 0.0) || !(lipschitz >= 0.0)) throw ArgError("B and L must be >= 0");
  return radius * radius / (2.0 * eta * static_cast<double>(iters)) + eta * lipschitz * lipschitz / 2.0;
}

double diminishing_bound(double radius, double lipschitz, std::size_t iters) {
  if (iters < 1) throw ArgError("T must be >= 1");
  if (!(radius >= 0.0) || !(lipschitz >= 0.0)) throw ArgError("B and L must be >= 0");
  return (radius * radius / 2.0 + lipschitz * lipschitz) / std::sqrt(static_cast<double>(iters));
}

SqrtSum sqrt_sum_check(std::size_t iters) {
  if (iters < 1) throw ArgError("T must be >= 1");
  // Kahan summation keeps the rounding error far below the slack 2sqrt(T) - sum > 1.
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t t = 1; t <= iters; ++t) {
    const double y = 1.0 / std::sqrt(static_cast<double>(t)) - carry;
    const double s = sum + y;
    carry = (s - sum) - y;
    sum = s;
  }
  return {sum, 2.0 * std::sqrt(static_cast<double>(iters))};
}

std::vector<ConvexCase> convex_suite() {
  const Interval unit(-1.0, 1.0);
  std::vector<ConvexCase> cases;

  cases.push_back({Objective{ScalarTarget(
                                 "abs", [](double x) { return std::abs(x); }, unit, 1.0,
                                 [](double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }),
                             0.0, 0.0},
                   1.0});

  static constexpr double kDelta = 0.5;
  cases.push_back(
      {Objective{ScalarTarget(
                     "huber",
                     [](double x) {
                       const double a = std::abs(x);
                       return a <= kDelta ? 0.5 * x * x : kDelta * (a - 0.5 * kDelta);
                     },
                     unit, kDelta,
                     [](double x) { return std::clamp(x, -kDelta, kDelta); }),
                 0.0, 0.0},
       kDelta});

  cases.push_back({Objective{ScalarTarget(
                                 "clipped_quadratic", [](double x) { return 0.5 * x * x; }, unit,
                                 1.0, [](double x) { return x; }),
                             0.0, 0.0},
                   1.0});
  return cases;
}

Objective demo_objective(std::string_view builtin_name) {
  ScalarTarget target = funcspace::make_builtin(builtin_name);
  if (builtin_name == "f_demo") return {target, 0.75 * std::numbers::pi, -std::numbers::sqrt2};
  if (builtin_name == "r_demo") return {target, 0.5 * std::numbers::pi, -1.0};
  throw NameError("no known minimum for builtin '" + std::string(builtin_name) + "'");
}

}  // namespace plab::gd
