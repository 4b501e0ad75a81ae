#pragma once

#include <span>
#include <stdexcept>

namespace fanosteer {

/// A * exp(-(i - mean)^2 / (2 sigma^2)) in bin-index units.
struct GaussianFit {
  double amplitude = 0.0;
  double mean = 0.0;
  double sigma = 1.0;
  double residual = 0.0;  // sum of squared residuals
  int iterations = 0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kFitIterationCap = 200;
inline constexpr double kFitRelativeTolerance = 1e-10;

/// Unweighted Levenberg-Marquardt fit of a Gaussian to binned values sampled
/// at bin centers 0, 1, ..., n-1. Throws FitError when fewer than four bins are
/// nonzero or the iteration cap is reached.
GaussianFit fit_gaussian(std::span<const double> values);

}  // namespace fanosteer
