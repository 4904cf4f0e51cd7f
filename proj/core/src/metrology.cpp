#include "slitqfi/metrology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slitqfi/error.hpp"
#include "slitqfi/numerics.hpp"

namespace slitqfi {
namespace {

constexpr double kTargetChange = 1e-2;
constexpr double kDerivativeAgreement = 1e-11;
constexpr double kPureTolerance = 1e-6;

double relative_change(const GaussianState& plus, const GaussianState& minus,
                       double scale) {
  const double dm = (plus.mean() - minus.mean()).cwiseAbs().maxCoeff();
  const double dc = (plus.covariance() - minus.covariance()).cwiseAbs().maxCoeff();
  return std::max(dm, dc) / scale;
}

// Half-width of the interval around the working point on which the
// linearised transmissivity stays inside [0, 1].
double linear_half_width(const FPChannelPoint& point, double fd_step) {
  // The interval is symmetric, so the nearer of the two bounds decides.
  double half = std::max(1e3, 10.0 * fd_step);
  if (point.deta_dtheta != 0.0)
    half = std::min(half, std::min(point.eta, 1.0 - point.eta) /
                              std::abs(point.deta_dtheta));
  require(half >= fd_step, ErrorCode::kLinearizationInvalid,
          fmt::format("transmissivity eta = {} with slope {} leaves [0, 1] "
                      "within fd_step = {} of theta = {}",
                      point.eta, point.deta_dtheta, fd_step, point.theta));
  return half;
}

GaussianState channel_at(const GaussianState& input, int mode,
                         const FPChannelPoint& point, double delta) {
  const double eta = std::clamp(point.eta + point.deta_dtheta * delta, 0.0, 1.0);
  // The theta-dependent phase is applied as a separate small rotation so the
  // difference quotient does not lose digits against the large offset phi.
  GaussianState out = phase_loss_channel(input, mode, point.phi, eta);
  return phase_shift(out, mode, point.dphi_dtheta * delta);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double clamp_information(double value) {
  return (value < 0.0 && value >= -1e-9) ? 0.0 : value;
}

struct Quadrature {
  double mean;
  double variance;
  double dmean;
  double dvariance;
};

Quadrature quadrature_moments(const FamilyDerivative& deriv, int mode,
                              double angle) {
  const Eigen::Vector2d u(std::cos(angle), std::sin(angle));
  const Eigen::Vector2d d = deriv.state.mode_mean(mode);
  const Eigen::Matrix2d s = deriv.state.mode_covariance(mode);
  const Eigen::Vector2d dd = deriv.dmean.segment<2>(2 * mode);
  const Eigen::Matrix2d ds = deriv.dcovariance.block<2, 2>(2 * mode, 2 * mode);
  return {u.dot(d), u.dot(s * u), u.dot(dd), u.dot(ds * u)};
}

double homodyne_information(const Quadrature& q) {
  require(q.variance > 1e-12, ErrorCode::kDegenerateDistribution,
          fmt::format("quadrature variance {} is not positive", q.variance));
  return q.dmean * q.dmean / q.variance +
         q.dvariance * q.dvariance / (2.0 * q.variance * q.variance);
}

}  // namespace

StateFamily map_family(StateFamily family,
                       std::function<GaussianState(const GaussianState&)> op) {
  auto inner = std::move(family.evaluator);
  family.evaluator = [inner = std::move(inner), op = std::move(op)](double theta) {
    return op(inner(theta));
  };
  return family;
}

std::string_view to_string(FisherMethod method) {
  switch (method) {
    case FisherMethod::kClosedForm: return "closed-form";
    case FisherMethod::kGaussianGeneral: return "gaussian-general";
    case FisherMethod::kOracle: return "oracle";
  }
  return "unknown";
}

double crb_bound(double qfi, unsigned nu) {
  require(nu >= 1, ErrorCode::kInvalidArgument,
          "number of repetitions must be >= 1");
  if (!(qfi > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / (static_cast<double>(nu) * qfi);
}

FisherReport coherent_qfi(double nbar, const FPChannelPoint& point) {
  require(nbar >= 0.0, ErrorCode::kInvalidArgument,
          fmt::format("nbar must be >= 0, got {}", nbar));
  require(point.eta >= 0.0 && point.eta <= 1.0, ErrorCode::kInvalidArgument,
          fmt::format("eta = {} outside [0, 1]", point.eta));
  FisherReport report;
  report.theta = point.theta;
  report.method = FisherMethod::kClosedForm;
  if (point.eta == 0.0) {
    require(point.deta_dtheta == 0.0, ErrorCode::kSingularLoss,
            "eta = 0 with non-zero d eta / d theta");
    report.qfi = 0.0;
    return report;
  }
  const double phase_part = point.eta * point.dphi_dtheta * point.dphi_dtheta;
  const double loss_part =
      point.deta_dtheta * point.deta_dtheta / (4.0 * point.eta);
  report.qfi = 4.0 * nbar * (phase_part + loss_part);
  return report;
}

FamilyDerivative differentiate_family(const StateFamily& family, double theta,
                                      double fd_step) {
  require(fd_step > 0.0, ErrorCode::kInvalidArgument, "fd_step must be > 0");
  require(theta - fd_step >= family.theta_lo && theta + fd_step <= family.theta_hi,
          ErrorCode::kOutOfRange,
          fmt::format("theta = {} +- {} leaves the family domain [{}, {}]",
                      theta, fd_step, family.theta_lo, family.theta_hi));
  GaussianState centre = family(theta);
  const double scale =
      std::max({1.0, centre.mean().cwiseAbs().maxCoeff(),
                centre.covariance().cwiseAbs().maxCoeff()});
  const double h_max =
      std::min(theta - family.theta_lo, family.theta_hi - theta);

  double h = fd_step;
  for (int iter = 0; iter < 40; ++iter) {
    const double change = relative_change(family(theta + h), family(theta - h), scale);
    if (change >= kTargetChange || h >= h_max) break;
    const double grow = change > 0.0 ? kTargetChange / change : 1e3;
    h = std::min(h_max, h * std::clamp(grow, 2.0, 1e3));
  }

  // The step above is sized by the dominant (phase) change. Components that
  // are strongly nonlinear in theta, such as sqrt(eta) near eta = 0, need a
  // smaller one: halve while successive estimates disagree and keep the pair
  // with the smallest discrepancy.
  auto mean_at = [&](double x) { return Vector(family(x).mean()); };
  auto cov_at = [&](double x) { return Matrix(family(x).covariance()); };
  struct Estimate {
    Vector dmean;
    Matrix dcov;
  };
  auto estimate = [&](double step) {
    return Estimate{numerics::richardson_derivative_of(mean_at, theta, step, 3),
                    numerics::richardson_derivative_of(cov_at, theta, step, 3)};
  };
  auto magnitude = [](const Estimate& e) {
    return std::max(e.dmean.cwiseAbs().maxCoeff(), e.dcov.cwiseAbs().maxCoeff());
  };

  Estimate coarse = estimate(h);
  Estimate best = coarse;
  double best_step = h;
  double best_error = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 30 && 0.5 * h >= fd_step; ++iter) {
    Estimate fine = estimate(0.5 * h);
    const double size = magnitude(fine);
    const double diff = std::max((fine.dmean - coarse.dmean).cwiseAbs().maxCoeff(),
                                 (fine.dcov - coarse.dcov).cwiseAbs().maxCoeff());
    const double error = size > 0.0 ? diff / size : 0.0;
    if (error < best_error) {
      best_error = error;
      best = fine;
      best_step = 0.5 * h;
    }
    if (error <= kDerivativeAgreement) break;
    h *= 0.5;
    coarse = std::move(fine);
  }
  best.dcov = 0.5 * (best.dcov + best.dcov.transpose()).eval();
  return {std::move(centre), std::move(best.dmean), std::move(best.dcov), best_step};
}

FisherReport gaussian_qfi(const StateFamily& family, double theta,
                          double fd_step) {
  const FamilyDerivative deriv = differentiate_family(family, theta, fd_step);
  const Matrix& sigma = deriv.state.covariance();
  const int n = static_cast<int>(sigma.rows());

  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(sigma, Eigen::EigenvaluesOnly);
  const double ev_min = spectrum.eigenvalues().minCoeff();
  const double ev_max = spectrum.eigenvalues().maxCoeff();
  require(ev_min > 1e-12 * ev_max, ErrorCode::kIllConditioned,
          fmt::format("covariance eigenvalues span [{:.3g}, {:.3g}]", ev_min,
                      ev_max));
  const Eigen::LDLT<Matrix> sigma_ldlt(sigma);

  const Vector nu = symplectic_eigenvalues(sigma);
  const bool pure = ((nu.array() - 1.0).abs() <= kPureTolerance).all();

  double covariance_term = 0.0;
  if (pure) {
    const Matrix a = sigma_ldlt.solve(deriv.dcovariance);
    covariance_term = 0.25 * (a * a).trace();
  } else {
    const Matrix omega = symplectic_form(n / 2);
    const Matrix m = kron(sigma, sigma) - kron(omega, omega);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const Vector& lambda = eig.eigenvalues();
    const double cutoff = 1e-10 * lambda.cwiseAbs().maxCoeff();
    const Eigen::Map<const Vector> vec_ds(deriv.dcovariance.data(),
                                          deriv.dcovariance.size());
    const Vector proj = eig.eigenvectors().transpose() * vec_ds;
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
      if (std::abs(lambda(k)) > cutoff)
        covariance_term += proj(k) * proj(k) / lambda(k);
    covariance_term *= 0.5;
  }
  const double displacement_term = deriv.dmean.dot(sigma_ldlt.solve(deriv.dmean));

  FisherReport report;
  report.theta = theta;
  report.qfi = clamp_information(covariance_term + displacement_term);
  report.method = FisherMethod::kGaussianGeneral;
  report.fd_step = deriv.step;
  report.pure_branch = pure;
  return report;
}

StateFamily build_channel_output(const ProbeSpec& probe,
                                 const FPChannelPoint& point, double fd_step) {
  const GaussianState input = prepare_probe(probe);
  const double half = linear_half_width(point, fd_step);
  StateFamily family;
  family.theta_lo = point.theta - half;
  family.theta_hi = point.theta + half;
  family.evaluator = [input, point](double theta) {
    return channel_at(input, 0, point, theta - point.theta);
  };
  return family;
}

StateFamily build_mzi_output(const ProbeSpec& probe, const FPChannelPoint& point,
                             double phi_ref, double fd_step) {
  probe.validate();
  GaussianState input = vacuum_state(2);
  if (probe.kind != ProbeKind::kCoherent)
    input = squeeze(input, 1, probe.squeeze_r, probe.squeeze_angle);
  input = displace(input, 0, probe.coherent_amplitude());
  input = beam_splitter(input, 0, 1, 0.5);
  input = phase_shift(input, 1, phi_ref);

  const double half = linear_half_width(point, fd_step);
  StateFamily family;
  family.theta_lo = point.theta - half;
  family.theta_hi = point.theta + half;
  family.evaluator = [input = std::move(input), point](double theta) {
    return beam_splitter(channel_at(input, 0, point, theta - point.theta), 0, 1,
                         0.5);
  };
  return family;
}

double homodyne_fi(const StateFamily& family, double theta, int mode,
                   double quad_angle, double fd_step) {
  const FamilyDerivative deriv = differentiate_family(family, theta, fd_step);
  return homodyne_information(quadrature_moments(deriv, mode, quad_angle));
}

HomodyneOptimum optimal_homodyne_fi(const StateFamily& family, double theta,
                                    int mode, double fd_step) {
  const FamilyDerivative deriv = differentiate_family(family, theta, fd_step);
  auto info = [&](double angle) {
    return homodyne_information(quadrature_moments(deriv, mode, angle));
  };
  // I(angle) has period pi; scan one period, then polish the best sample.
  constexpr int kScan = 96;
  constexpr double kPi = std::numbers::pi;
  const double step = kPi / kScan;
  int best = 0;
  double best_value = -1.0;
  for (int i = 0; i < kScan; ++i) {
    const double v = info(i * step);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const auto top = numerics::golden_section_max(info, (best - 1) * step,
                                                (best + 1) * step, 1e-8);
  HomodyneOptimum out;
  out.angle = std::fmod(top.x, kPi);
  if (out.angle < 0.0) out.angle += kPi;
  out.fi = std::max(top.value, best_value);
  return out;
}

double counting_fi(double mean_counts, double d_mean_counts) {
  require(mean_counts > 0.0, ErrorCode::kInvalidArgument,
          fmt::format("mean counts must be > 0, got {}", mean_counts));
  return d_mean_counts * d_mean_counts / mean_counts;
}

double balanced_detection_fi(const ProbeSpec& probe, const FPChannelPoint& point,
                             double phi_ref, double fd_step) {
  require(probe.kind == ProbeKind::kCoherent, ErrorCode::kInvalidArgument,
          "balanced detection is modelled for coherent probes only");
  const StateFamily family = build_mzi_output(probe, point, phi_ref, fd_step);
  const FamilyDerivative deriv = differentiate_family(family, point.theta, fd_step);
  double mu[2];
  double dmu[2];
  for (int k = 0; k < 2; ++k) {
    const Eigen::Vector2d d = deriv.state.mode_mean(k);
    const Eigen::Vector2d dd = deriv.dmean.segment<2>(2 * k);
    const Eigen::Matrix2d ds = deriv.dcovariance.block<2, 2>(2 * k, 2 * k);
    mu[k] = mean_photon(deriv.state, k);
    dmu[k] = (ds(0, 0) + ds(1, 1) + 2.0 * d.dot(dd)) / 4.0;
  }
  const double variance = mu[0] + mu[1];
  require(variance > 1e-12, ErrorCode::kDegenerateDistribution,
          "both interferometer ports are dark");
  const double slope = dmu[0] - dmu[1];
  return slope * slope / variance;
}

}  // namespace slitqfi
