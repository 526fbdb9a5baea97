#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "plab/funcspace.hpp"

namespace plab::pwl {

inline constexpr std::size_t kDefaultGridPerSegment = 64;
inline constexpr std::size_t kDefaultSegmentCap = 10'000'000;

// Continuous piecewise-linear function on uniform knots a + i(b-a)/n.
class UniformPWL {
 public:
  UniformPWL(Interval interval, std::vector<double> knot_values);

  const Interval& interval() const { return interval_; }
  std::size_t n_segments() const { return knot_values_.size() - 1; }
  std::span<const double> knot_values() const { return knot_values_; }
  double knot_x(std::size_t i) const;

  // Exact stored value at knot_x(i); linear interpolation in between;
  // constant extension outside the interval.
  double operator()(double x) const;

 private:
  Interval interval_;
  std::vector<double> knot_values_;
};

enum class Metric { sup, l1 };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric);

struct ApproxReport {
  std::size_t n_segments = 0;
  double sup_error = 0.0;
  double l1_error = 0.0;
};

// Segment count that makes the uniform endpoint interpolant of any
// L-Lipschitz function meet an integrated-error tolerance eps:
// max(1, ceil(L (b-a)^2 / (4 eps))).
std::size_t segment_bound(double lipschitz, const Interval& interval, double eps);

UniformPWL interpolate_uniform(const ScalarTarget& target, std::size_t n);

// Error of pwl against target on a composite grid with grid_per_segment
// sub-intervals per segment: max |f - fhat| for sup, composite trapezoid of
// |f - fhat| for l1.
double approx_error(const ScalarTarget& target, const UniformPWL& pwl, Metric metric,
                    std::size_t grid_per_segment = kDefaultGridPerSegment);

ApproxReport approx_report(const ScalarTarget& target, const UniformPWL& pwl,
                           std::size_t grid_per_segment = kDefaultGridPerSegment);

// Smallest n whose uniform interpolant meets eps. The error is not monotone
// in n for oscillatory targets, so the search doubles n until eps is met and
// then scans the final bracket (n/2, n] upward. Throws CapError past cap.
std::size_t min_segments(const ScalarTarget& target, double eps, Metric metric,
                         std::size_t cap = kDefaultSegmentCap,
                         std::size_t grid_per_segment = kDefaultGridPerSegment);

// 100 (n_f - n_r) / n_f. Throws AssumptionError when n_r > n_f.
double reduction_percent(std::size_t n_f, std::size_t n_r);

struct PiecesRow {
  double eps = 0.0;
  std::size_t n_f = 0;
  std::size_t n_r = 0;
  double reduction_percent = 0.0;
};

// One row per tolerance, comparing the segment counts of an original target
// and its residual.
std::vector<PiecesRow> pieces_table(const ScalarTarget& original, const ScalarTarget& residual,
                                    std::span<const double> eps_values, Metric metric,
                                    std::size_t grid_per_segment = kDefaultGridPerSegment);

// Triangle wave with slopes +-slope and `teeth` full periods over the
// interval. Its Lipschitz constant is exactly `slope`.
ScalarTarget zigzag(double slope, const Interval& interval, std::size_t teeth);

}  // namespace plab::pwl
