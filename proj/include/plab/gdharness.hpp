#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "plab/funcspace.hpp"

namespace plab::gd {

struct ConstantStep {
  double eta = 0.1;
};

// eta_t = 1 / sqrt(t) for the step taken from the t-th iterate.
struct DiminishingStep {};

using StepSchedule = std::variant<ConstantStep, DiminishingStep>;

enum class StopCriterion { value_gap, iterate_step };

StopCriterion parse_stop_criterion(std::string_view name);

struct GDConfig {
  double x0 = 0.0;
  StepSchedule schedule = ConstantStep{};
  std::size_t max_iters = 1000;
  double tol = 1e-3;
  StopCriterion stop_on = StopCriterion::value_gap;

  void validate() const;
};

// An objective together with its known global minimum on the interval.
struct Objective {
  ScalarTarget target;
  double x_star = 0.0;
  double f_star = 0.0;
};

// Iterates x^1 (the initial point) .. x^{T+1}. The averaged gap of the
// convergence bounds runs over the first `horizon` entries.
struct GDTrace {
  std::vector<double> iterates;
  std::vector<double> values;
  std::optional<std::size_t> iterations_to_tol;
  double f_star = 0.0;
  double radius = 0.0;  // B: max distance from x* to the interval ends
  std::size_t horizon = 0;
};

// Projected gradient descent: x^{t+1} = clamp(x^t - eta_t f'(x^t)) onto the
// target's interval, for t = 1..max_iters. iterations_to_tol is the first t
// whose step satisfies the stop criterion (value_gap: f(x^{t+1}) - f* <= tol;
// iterate_step: |x^{t+1} - x^t| <= tol). The run always takes all
// max_iters steps. Throws DivergedError on a non-finite gradient.
GDTrace run_gd(const Objective& objective, const GDConfig& config);

// (1/T) sum_{t=1..T} (f(x^t) - f*), T = min(horizon, values.size()).
double avg_gap(const GDTrace& trace);

// B^2 / (2 eta T) + eta L^2 / 2
double constant_step_bound(double radius, double lipschitz, double eta, std::size_t iters);

// (B^2 / 2 + L^2) / sqrt(T)
double diminishing_bound(double radius, double lipschitz, std::size_t iters);

struct SqrtSum {
  double sum = 0.0;
  double bound = 0.0;
};

// sum_{t=1..T} 1/sqrt(t) by direct (compensated) summation, against 2 sqrt(T).
SqrtSum sqrt_sum_check(std::size_t iters);

// Convex Lipschitz test objectives on [-1, 1] with minimizer 0 (so B = 1):
// |x| (L = 1), Huber with delta 0.5 (L = 0.5), x^2/2 restricted to the
// interval (L = 1).
struct ConvexCase {
  Objective objective;
  double lipschitz = 0.0;
};

std::vector<ConvexCase> convex_suite();

// The trigonometric demo targets with their global minimum on [0, 10]:
// f_demo has f* = -sqrt(2) at 3pi/4, r_demo has f* = -1 at pi/2.
Objective demo_objective(std::string_view builtin_name);

}  // namespace plab::gd
