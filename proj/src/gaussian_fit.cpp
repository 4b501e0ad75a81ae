#include "fanosteer/gaussian_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fanosteer {
namespace {

struct Residuals {
  Eigen::VectorXd r;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;
};

Residuals evaluate(std::span<const double> y, const Eigen::Vector3d& p) {
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Residuals out{Eigen::VectorXd(n), Eigen::MatrixXd(n, 3), 0.0};
  const double a = p(0), m = p(1), s = p(2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - m;
    const double e = std::exp(-d * d / (2.0 * s * s));
    out.r(i) = y[static_cast<std::size_t>(i)] - a * e;
    out.jacobian(i, 0) = e;
    out.jacobian(i, 1) = a * e * d / (s * s);
    out.jacobian(i, 2) = a * e * d * d / (s * s * s);
  }
  out.cost = out.r.squaredNorm();
  return out;
}

constexpr double kStationaryCostFraction = 1e-14;

// Size of the cost change that round-off in the residuals can produce.
double cost_noise_floor(std::span<const double> y, const Eigen::VectorXd& r) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    sum += std::abs(r(i)) * (std::abs(yi) + std::abs(yi - r(i)));
  }
  return 4.0 * std::numeric_limits<double>::epsilon() * sum;
}

}  // namespace

GaussianFit fit_gaussian(std::span<const double> values) {
  const auto nonzero = std::count_if(values.begin(), values.end(), [](double v) { return v > 0.0; });
  if (nonzero < 4) {
    throw FitError("gaussian fit needs at least 4 nonzero bins, got " + std::to_string(nonzero));
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw FitError("gaussian fit: negative or non-finite bin");
  }

  // Moment-based starting point.
  double w = 0.0, m1 = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w += values[i];
    m1 += values[i] * static_cast<double>(i);
    peak = std::max(peak, values[i]);
  }
  m1 /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = static_cast<double>(i) - m1;
    var += values[i] * d * d;
  }
  var /= w;

  Eigen::Vector3d p(peak, m1, std::sqrt(std::max(var, 0.25)));
  Residuals cur = evaluate(values, p);
  double lambda = 1e-3;

  for (int it = 1; it <= kFitIterationCap; ++it) {
    const Eigen::Matrix3d jtj = cur.jacobian.transpose() * cur.jacobian;
    const Eigen::Vector3d jtr = cur.jacobian.transpose() * cur.r;
    Eigen::Matrix3d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
    const Eigen::Vector3d step = damped.ldlt().solve(jtr);

    // Converged when the undamped Gauss-Newton step is negligible, or when
    // the decrease it predicts is below round-off in the cost (every step
    // is then rejected and the GN step can sit near 1e-10 relative forever). A small damped step alone can
    // just mean heavy damping.
    const Eigen::Vector3d gn_step = jtj.ldlt().solve(jtr);
    const bool tiny_step =
        (gn_step.array().abs() <= kFitRelativeTolerance * (p.array().abs() + kFitRelativeTolerance))
            .all();
    const bool stationary =
        jtr.dot(gn_step) <= std::max(kStationaryCostFraction * cur.cost, cost_noise_floor(values, cur.r));
    const bool converged = gn_step.allFinite() && (tiny_step || stationary);
    if (converged) {
      return GaussianFit{p(0), p(1), std::abs(p(2)), cur.cost, it};
    }
    const Eigen::Vector3d trial = p + step;
    if (trial(2) != 0.0 && step.allFinite()) {
      Residuals next = evaluate(values, trial);
      if (next.cost <= cur.cost) {
        p = trial;
        cur = std::move(next);
        lambda = std::max(lambda * 0.1, 1e-12);
      } else {
        lambda *= 10.0;
      }
    } else {
      lambda *= 10.0;
    }
  }
  throw FitError("gaussian fit did not converge within " + std::to_string(kFitIterationCap) +
                 " iterations");
}

}  // namespace fanosteer
