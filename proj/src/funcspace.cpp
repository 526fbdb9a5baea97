#include "plab/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plab/errors.hpp"

namespace plab {

Interval::Interval(double a, double b) : a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("interval bounds must be finite");
  if (!(a < b)) throw DomainError("interval requires a < b");
}

double Interval::clamp(double x) const { return std::clamp(x, a_, b_); }

ScalarTarget::ScalarTarget(std::string id, Fn eval, Interval interval,
                           std::optional<double> lipschitz, Fn derivative)
    : id_(std::move(id)),
      eval_(std::move(eval)),
      derivative_(std::move(derivative)),
      interval_(interval),
      lipschitz_(lipschitz) {
  if (!eval_) throw ArgError("target '" + id_ + "' has no evaluation function");
  if (lipschitz_ && !(*lipschitz_ >= 0.0)) throw ArgError("Lipschitz constant must be >= 0");
}

double ScalarTarget::derivative(double x) const {
  if (derivative_) return derivative_(x);
  constexpr double h = 1e-6;
  return (eval_(x + h) - eval_(x - h)) / (2.0 * h);
}

namespace funcspace {

ScalarTarget make_builtin(std::string_view name) {
  const Interval domain(0.0, 10.0);
  // On [0, 10] each derivative reaches its amplitude, so sup |f'| is the
  // amplitude itself.
  if (name == "f_demo") {
    return ScalarTarget(
        "f_demo", [](double x) { return std::cos(x) - std::sin(x); }, domain, std::numbers::sqrt2,
        [](double x) { return -std::sin(x) - std::cos(x); });
  }
  if (name == "r_demo") {
    return ScalarTarget(
        "r_demo", [](double x) { return -std::sin(x); }, domain, 1.0,
        [](double x) { return -std::cos(x); });
  }
  if (name == "phys_demo") {
    return ScalarTarget(
        "phys_demo", [](double x) { return std::cos(x); }, domain, 1.0,
        [](double x) { return -std::sin(x); });
  }
  throw NameError("unknown builtin target '" + std::string(name) + "'");
}

double estimate_lipschitz(const ScalarTarget& target, std::size_t grid_points) {
  if (grid_points < 2) throw ArgError("estimate_lipschitz needs at least 2 grid points");
  const Interval& iv = target.interval();
  const double n = static_cast<double>(grid_points - 1);
  auto node = [&](std::size_t i) {
    return i + 1 == grid_points ? iv.b() : iv.a() + iv.width() * (static_cast<double>(i) / n);
  };

  double best = 0.0;
  double x_prev = node(0);
  double f_prev = target(x_prev);
  if (!std::isfinite(f_prev)) throw EvalError("non-finite value of '" + target.id() + "'");
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double x = node(i);
    const double f = target(x);
    if (!std::isfinite(f)) throw EvalError("non-finite value of '" + target.id() + "'");
    best = std::max(best, std::abs(f - f_prev) / (x - x_prev));
    x_prev = x;
    f_prev = f;
  }
  return best;
}

ScalarTarget residual_target(const ScalarTarget& g, const ScalarTarget& phys) {
  if (!(g.interval() == phys.interval())) {
    throw DomainError("residual of '" + g.id() + "' and '" + phys.id() + "' over different intervals");
  }
  ScalarTarget::Fn derivative;
  if (g.has_derivative() && phys.has_derivative()) {
    derivative = [g, phys](double x) { return g.derivative(x) - phys.derivative(x); };
  }
  return ScalarTarget(
      g.id() + "-" + phys.id(), [g, phys](double x) { return g(x) - phys(x); }, g.interval(),
      std::nullopt, std::move(derivative));
}

}  // namespace funcspace
}  // namespace plab
