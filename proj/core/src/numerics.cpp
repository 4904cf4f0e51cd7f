#include "slitqfi/numerics.hpp"

#include <fmt/format.h>

#include "slitqfi/error.hpp"

namespace slitqfi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kNoResonance: return "no-resonance";
    case ErrorCode::kWindowTooNarrow: return "window-too-narrow";
    case ErrorCode::kSingularLoss: return "singular-loss";
    case ErrorCode::kIllConditioned: return "ill-conditioned-state";
    case ErrorCode::kLinearizationInvalid: return "linearization-invalid";
    case ErrorCode::kDegenerateDistribution: return "degenerate-distribution";
    case ErrorCode::kTruncation: return "truncation";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kSweepFailed: return "sweep-failed";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, fmt::format("{}: {}", to_string(code), what));
}

namespace numerics {

Extremum golden_section_max(const std::function<double(double)>& f, double lo,
                            double hi, double tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  // The bracket midpoint is not guaranteed to beat the interior probes.
  if (fc > fx && fc >= fd) return {c, fc};
  if (fd > fx) return {d, fd};
  return {x, fx};
}

double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double tol, int max_iter) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ParabolaVertex parabola_vertex(double x0, double h_left, double h_right,
                               double y_m, double y_0, double y_p) {
  // Divided differences on the (possibly non-uniform) stencil.
  const double s_left = (y_0 - y_m) / h_left;
  const double s_right = (y_p - y_0) / h_right;
  const double curvature = 2.0 * (s_right - s_left) / (h_left + h_right);
  if (!(curvature < -1e-15) || !std::isfinite(curvature)) return {};
  // Slope at x0 of the interpolating parabola.
  const double slope = (s_left * h_right + s_right * h_left) / (h_left + h_right);
  const double offset = -slope / curvature;
  return {true, x0 + offset, y_0 + 0.5 * slope * offset};
}

}  // namespace numerics
}  // namespace slitqfi
