#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace plab {

// Closed interval [a, b] with finite a < b.
class Interval {
 public:
  Interval(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double width() const { return b_ - a_; }
  bool contains(double x) const { return x >= a_ && x <= b_; }
  double clamp(double x) const;

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double a_;
  double b_;
};

// A one-dimensional target function on an interval, optionally carrying a
// known Lipschitz constant and a closed-form derivative. Immutable.
class ScalarTarget {
 public:
  using Fn = std::function<double(double)>;

  ScalarTarget(std::string id, Fn eval, Interval interval,
               std::optional<double> lipschitz = std::nullopt, Fn derivative = nullptr);

  const std::string& id() const { return id_; }
  const Interval& interval() const { return interval_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  bool has_derivative() const { return static_cast<bool>(derivative_); }

  double operator()(double x) const { return eval_(x); }

  // Closed-form derivative when available, otherwise a central difference
  // with step 1e-6.
  double derivative(double x) const;

 private:
  std::string id_;
  Fn eval_;
  Fn derivative_;
  Interval interval_;
  std::optional<double> lipschitz_;
};

namespace funcspace {

inline constexpr std::size_t kDefaultLipschitzGrid = 100'000;

// f_demo = cos x - sin x, r_demo = -sin x, phys_demo = cos x, all on [0, 10],
// with sup |f'| on [0, 10] attached. Throws NameError for anything else.
ScalarTarget make_builtin(std::string_view name);

// Largest consecutive difference quotient on a uniform grid of grid_points
// points. Throws ArgError if grid_points < 2, EvalError on non-finite values.
double estimate_lipschitz(const ScalarTarget& target,
                          std::size_t grid_points = kDefaultLipschitzGrid);

// x -> g(x) - phys(x). Throws DomainError when the intervals differ.
ScalarTarget residual_target(const ScalarTarget& g, const ScalarTarget& phys);

}  // namespace funcspace
}  // namespace plab
