#include "fanosteer/spdc_sim.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanosteer {
namespace {

constexpr int kSubintervals = 8;
// Three-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 3> kNodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// P(lo < Z < hi) for a standard normal, accurate in both tails.
double normal_interval(double lo, double hi) {
  constexpr double r = std::numbers::sqrt2;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo / r) - std::erfc(hi / r));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi / r) - std::erfc(-lo / r));
  return 1.0 - 0.5 * (std::erfc(-lo / r) + std::erfc(hi / r));
}

}  // namespace

void BiphotonModel::validate() const {
  if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) {
    throw std::invalid_argument("biphoton widths must be positive");
  }
  if (!(grid_extent > 0.0) || pixels_per_axis < 2) {
    throw std::invalid_argument("degenerate grid: need positive extent and >= 2 pixels");
  }
  if (momentum_extent && !(*momentum_extent > 0.0)) {
    throw std::invalid_argument("momentum extent must be positive");
  }
}

double BiphotonModel::momentum_grid_extent() const {
  return momentum_extent.value_or(grid_extent / (2.0 * sigma_plus * sigma_minus));
}

ModeWidths position_mode_widths(const BiphotonModel& m) {
  return ModeWidths{m.sigma_plus, m.sigma_minus};
}

ModeWidths momentum_mode_widths(const BiphotonModel& m) {
  return ModeWidths{1.0 / (2.0 * m.sigma_plus), 1.0 / (2.0 * m.sigma_minus)};
}

JointDistribution integrate_double_gaussian(const ModeWidths& widths, double extent, int pixels) {
  if (!(widths.sum > 0.0) || !(widths.difference > 0.0)) {
    throw std::invalid_argument("mode widths must be positive");
  }
  if (!(extent > 0.0) || pixels < 2) {
    throw std::invalid_argument("degenerate grid: need positive extent and >= 2 pixels");
  }
  // (a + b) ~ N(0, 2 s_sum^2) and (a - b) ~ N(0, 2 s_diff^2), so a is normal
  // and b | a is normal with a linear mean.
  const double s2 = widths.sum * widths.sum;
  const double d2 = widths.difference * widths.difference;
  const double var_a = 0.5 * (s2 + d2);
  const double cov = 0.5 * (s2 - d2);
  const double slope = cov / var_a;
  const double cond_sd = std::sqrt(2.0 * s2 * d2 / (s2 + d2));
  const double sd_a = std::sqrt(var_a);
  const double norm_a = 1.0 / (sd_a * std::sqrt(2.0 * std::numbers::pi));

  const double width = extent / pixels;
  const double left = -0.5 * extent;
  std::vector<double> edges(static_cast<std::size_t>(pixels) + 1);
  for (int e = 0; e <= pixels; ++e) edges[static_cast<std::size_t>(e)] = left + e * width;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pixels, pixels);
  const double sub = width / kSubintervals;
  for (int i = 0; i < pixels; ++i) {
    for (int s = 0; s < kSubintervals; ++s) {
      const double centre = edges[static_cast<std::size_t>(i)] + (s + 0.5) * sub;
      for (std::size_t q = 0; q < kNodes.size(); ++q) {
        const double a = centre + 0.5 * sub * kNodes[q];
        const double density = norm_a * std::exp(-0.5 * a * a / var_a);
        const double w = 0.5 * sub * kWeights[q] * density;
        const double mean_b = slope * a;
        for (int j = 0; j < pixels; ++j) {
          const double lo = (edges[static_cast<std::size_t>(j)] - mean_b) / cond_sd;
          const double hi = (edges[static_cast<std::size_t>(j) + 1] - mean_b) / cond_sd;
          m(i, j) += w * normal_interval(lo, hi);
        }
      }
    }
  }
  // The density is exchange symmetric; averaging with the transpose is the
  // same rule applied with the roles of a and b swapped.
  const Eigen::MatrixXd symmetric = 0.5 * (m + m.transpose());
  return JointDistribution(symmetric, width, width);
}

JointDistribution joint_position_distribution(const BiphotonModel& m) {
  m.validate();
  return integrate_double_gaussian(position_mode_widths(m), m.grid_extent, m.pixels_per_axis);
}

JointDistribution joint_momentum_distribution(const BiphotonModel& m) {
  m.validate();
  return integrate_double_gaussian(momentum_mode_widths(m), m.momentum_grid_extent(),
                                   m.pixels_per_axis);
}

WindowedJoint truncate_to_window(const JointDistribution& full, int window_pixels) {
  if (!full.is_square()) {
    throw std::invalid_argument("window truncation needs a square joint distribution");
  }
  const int n = static_cast<int>(full.rows());
  if (window_pixels < 1 || window_pixels > n) {
    throw std::invalid_argument("window of " + std::to_string(window_pixels) +
                                " pixels exceeds the " + std::to_string(n) + "-pixel grid");
  }
  const int start = (n - window_pixels) / 2;
  const Eigen::MatrixXd block = full.matrix().block(start, start, window_pixels, window_pixels);
  const double mu = block.sum();
  if (!(mu > 0.0)) {
    throw std::invalid_argument("window holds no probability mass");
  }
  return WindowedJoint{JointDistribution(block / mu, full.bin_width_a(), full.bin_width_b()), mu};
}

JointDistribution apply_dead_space(const JointDistribution& j, double fill_a, double fill_b) {
  if (!(fill_a > 0.0 && fill_a <= 1.0) || !(fill_b > 0.0 && fill_b <= 1.0)) {
    throw std::invalid_argument("fill factors must lie in (0,1]");
  }
  return JointDistribution(j.matrix() * (fill_a * fill_b), j.bin_width_a(), j.bin_width_b(),
                           j.total_counts());
}

JointDistribution CountMatrix::to_joint(double bin_width_a, double bin_width_b) const {
  return JointDistribution::from_counts(counts.cast<double>(), bin_width_a, bin_width_b);
}

CountMatrix sample_counts(const JointDistribution& j, std::uint64_t total, std::uint64_t seed) {
  if (total == 0) {
    throw std::invalid_argument("sample_counts: total must be at least 1");
  }
  if (!j.is_normalized()) {
    throw std::invalid_argument("sample_counts: joint distribution is not normalized");
  }
  std::mt19937_64 rng(seed);
  CountMatrix out{CountArray::Zero(j.rows(), j.cols()), total, seed};

  // Sequential conditional binomials over the cells in row-major order; the
  // last cell with positive probability takes whatever remains.
  const Eigen::Index cells = j.rows() * j.cols();
  auto at = [&](Eigen::Index idx) { return j(idx / j.cols(), idx % j.cols()); };
  Eigen::Index last = cells - 1;
  while (last > 0 && at(last) <= 0.0) --last;

  std::uint64_t remaining = total;
  double remaining_mass = 1.0;
  for (Eigen::Index idx = 0; idx <= last && remaining > 0; ++idx) {
    const double p = at(idx);
    if (p <= 0.0) continue;
    std::uint64_t k = remaining;
    if (idx < last && p < remaining_mass) {
      std::binomial_distribution<std::uint64_t> draw(remaining, p / remaining_mass);
      k = draw(rng);
    }
    out.counts(idx / j.cols(), idx % j.cols()) = k;
    remaining -= k;
    remaining_mass -= p;
  }
  return out;
}

JointDistribution threshold_renormalize(const JointDistribution& j, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("threshold fraction must lie in [0,1]");
  }
  const double peak = j.matrix().maxCoeff();
  if (!(peak > 0.0)) {
    throw std::invalid_argument("threshold needs a positive maximum");
  }
  const double cut = fraction * peak;
  const Eigen::MatrixXd kept = (j.matrix().array() < cut).select(0.0, j.matrix());
  const double mass = kept.sum();
  if (!(mass > 0.0)) {
    throw std::invalid_argument("thresholding removed every entry");
  }
  return JointDistribution(kept / mass, j.bin_width_a(), j.bin_width_b(), j.total_counts());
}

}  // namespace fanosteer
