#include "plab/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plab/errors.hpp"

namespace plab::pwl {

UniformPWL::UniformPWL(Interval interval, std::vector<double> knot_values)
    : interval_(interval), knot_values_(std::move(knot_values)) {
  if (knot_values_.size() < 2) throw ArgError("a piecewise-linear function needs at least 2 knots");
}

double UniformPWL::knot_x(std::size_t i) const {
  const std::size_t n = n_segments();
  if (i == n) return interval_.b();
  return interval_.a() + interval_.width() * (static_cast<double>(i) / static_cast<double>(n));
}

double UniformPWL::operator()(double x) const {
  const std::size_t n = n_segments();
  if (x <= interval_.a()) return knot_values_.front();
  if (x >= interval_.b()) return knot_values_.back();

  const double u = (x - interval_.a()) / interval_.width() * static_cast<double>(n);
  const auto nearest = static_cast<std::size_t>(std::lround(u));
  if (nearest <= n && knot_x(nearest) == x) return knot_values_[nearest];

  const std::size_t j = std::min(static_cast<std::size_t>(u), n - 1);
  const double x0 = knot_x(j);
  const double x1 = knot_x(j + 1);
  const double t = (x - x0) / (x1 - x0);
  return knot_values_[j] + t * (knot_values_[j + 1] - knot_values_[j]);
}

Metric parse_metric(std::string_view name) {
  if (name == "sup") return Metric::sup;
  if (name == "l1") return Metric::l1;
  throw ArgError("unknown error metric '" + std::string(name) + "' (expected sup or l1)");
}

std::string_view to_string(Metric metric) { return metric == Metric::sup ? "sup" : "l1"; }

std::size_t segment_bound(double lipschitz, const Interval& interval, double eps) {
  if (!(eps > 0.0)) throw ArgError("segment_bound requires eps > 0");
  if (!(lipschitz >= 0.0)) throw ArgError("segment_bound requires L >= 0");
  const double raw = std::ceil(lipschitz * interval.width() * interval.width() / (4.0 * eps));
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

UniformPWL interpolate_uniform(const ScalarTarget& target, std::size_t n) {
  if (n < 1) throw ArgError("interpolate_uniform requires n >= 1");
  const Interval& iv = target.interval();
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x =
        i == n ? iv.b() : iv.a() + iv.width() * (static_cast<double>(i) / static_cast<double>(n));
    values[i] = target(x);
  }
  return UniformPWL(iv, std::move(values));
}

namespace {

void check_grid(std::size_t grid_per_segment) {
  if (grid_per_segment < 8) throw ArgError("grid_per_segment must be >= 8");
}

// Walks the composite grid once and accumulates both metrics.
ApproxReport measure(const ScalarTarget& target, const UniformPWL& pwl, std::size_t grid) {
  ApproxReport report;
  report.n_segments = pwl.n_segments();
  const auto knots = pwl.knot_values();
  for (std::size_t j = 0; j < pwl.n_segments(); ++j) {
    const double x0 = pwl.knot_x(j);
    const double x1 = pwl.knot_x(j + 1);
    const double h = (x1 - x0) / static_cast<double>(grid);
    double prev = 0.0;
    for (std::size_t k = 0; k <= grid; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(grid);
      const double x = k == grid ? x1 : x0 + (x1 - x0) * t;
      const double fhat = k == 0 ? knots[j] : k == grid ? knots[j + 1] : knots[j] + t * (knots[j + 1] - knots[j]);
      const double e = std::abs(target(x) - fhat);
      report.sup_error = std::max(report.sup_error, e);
      if (k > 0) report.l1_error += 0.5 * h * (prev + e);
      prev = e;
    }
  }
  return report;
}

}  // namespace

double approx_error(const ScalarTarget& target, const UniformPWL& pwl, Metric metric,
                    std::size_t grid_per_segment) {
  check_grid(grid_per_segment);
  const ApproxReport r = measure(target, pwl, grid_per_segment);
  return metric == Metric::sup ? r.sup_error : r.l1_error;
}

ApproxReport approx_report(const ScalarTarget& target, const UniformPWL& pwl,
                           std::size_t grid_per_segment) {
  check_grid(grid_per_segment);
  return measure(target, pwl, grid_per_segment);
}

std::size_t min_segments(const ScalarTarget& target, double eps, Metric metric, std::size_t cap,
                         std::size_t grid_per_segment) {
  if (!(eps > 0.0)) throw ArgError("min_segments requires eps > 0");
  check_grid(grid_per_segment);
  auto meets = [&](std::size_t n) {
    return approx_error(target, interpolate_uniform(target, n), metric, grid_per_segment) <= eps;
  };

  std::size_t hi = 1;
  while (!meets(hi)) {
    if (hi >= cap) {
      throw CapError("no segment count <= " + std::to_string(cap) + " meets eps for '" +
                     target.id() + "'");
    }
    hi = std::min(hi * 2, cap);
  }
  for (std::size_t n = hi / 2 + 1; n < hi; ++n) {
    if (meets(n)) return n;
  }
  return hi;
}

double reduction_percent(std::size_t n_f, std::size_t n_r) {
  if (n_f < 1 || n_r < 1) throw ArgError("segment counts must be >= 1");
  if (n_r > n_f) {
    throw AssumptionError("residual needs more segments (" + std::to_string(n_r) +
                          ") than the original (" + std::to_string(n_f) + ")");
  }
  return 100.0 * static_cast<double>(n_f - n_r) / static_cast<double>(n_f);
}

std::vector<PiecesRow> pieces_table(const ScalarTarget& original, const ScalarTarget& residual,
                                    std::span<const double> eps_values, Metric metric,
                                    std::size_t grid_per_segment) {
  std::vector<PiecesRow> rows;
  rows.reserve(eps_values.size());
  for (double eps : eps_values) {
    PiecesRow row;
    row.eps = eps;
    row.n_f = min_segments(original, eps, metric, kDefaultSegmentCap, grid_per_segment);
    row.n_r = min_segments(residual, eps, metric, kDefaultSegmentCap, grid_per_segment);
    row.reduction_percent = reduction_percent(row.n_f, row.n_r);
    rows.push_back(row);
  }
  return rows;
}

ScalarTarget zigzag(double slope, const Interval& interval, std::size_t teeth) {
  if (!(slope >= 0.0)) throw ArgError("zigzag slope must be >= 0");
  if (teeth < 1) throw ArgError("zigzag needs at least one tooth");
  const double period = interval.width() / static_cast<double>(teeth);
  const double a = interval.a();
  auto eval = [=](double x) {
    const double phase = std::fmod(x - a, period);
    const double half = 0.5 * period;
    return slope * (phase <= half ? phase : period - phase);
  };
  return ScalarTarget("zigzag", eval, interval, slope);
}

}  // namespace plab::pwl
