#pragma once

#include "fanosteer/entropy.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

// Synthetic double-Gaussian biphoton fixtures. Position outcomes follow
//   P(xA, xB) ~ exp(-(xA + xB)^2 / (4 s+^2) - (xA - xB)^2 / (4 s-^2)),
// and momentum outcomes the Fourier-conjugate density, which is
// anti-correlated (kA ~ -kB) when s+ > s-.

namespace fanosteer {

struct BiphotonModel {
  double sigma_plus = 50.0;
  double sigma_minus = 1.0;
  /// Side length of the position grid, centered on the origin.
  double grid_extent = 240.0;
  int pixels_per_axis = 32;
  /// Side length of the momentum grid. Defaults to grid_extent / (2 s+ s-),
  /// which makes both marginals span the same number of standard deviations.
  std::optional<double> momentum_extent;

  void validate() const;
  double position_bin_width() const { return grid_extent / pixels_per_axis; }
  double momentum_grid_extent() const;
  double momentum_bin_width() const { return momentum_grid_extent() / pixels_per_axis; }
};

/// Standard deviations of the (a + b) and (a - b) modes, each entering the
/// density as exp(-(mode)^2 / (4 width^2)).
struct ModeWidths {
  double sum = 1.0;
  double difference = 1.0;
};

ModeWidths position_mode_widths(const BiphotonModel& m);
/// Conjugate widths: sum mode 1/(2 s+), difference mode 1/(2 s-).
ModeWidths momentum_mode_widths(const BiphotonModel& m);

/// Pixel-integrated probabilities on the grid. Entries are absolute
/// probabilities, so mass() is the fraction of all pairs landing on the grid.
JointDistribution joint_position_distribution(const BiphotonModel& m);
JointDistribution joint_momentum_distribution(const BiphotonModel& m);

/// Pixel integration of an arbitrary exchange-symmetric double Gaussian.
JointDistribution integrate_double_gaussian(const ModeWidths& widths, double extent, int pixels);

struct WindowedJoint {
  JointDistribution joint;  // renormalized over the window
  double mu_true = 1.0;     // mass inside the window
};

/// Centered window_pixels x window_pixels sub-block of a square joint.
WindowedJoint truncate_to_window(const JointDistribution& full, int window_pixels);

/// Uniform loss: scales every entry by fill_a * fill_b.
JointDistribution apply_dead_space(const JointDistribution& j, double fill_a, double fill_b);

using CountArray = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct CountMatrix {
  CountArray counts;
  std::uint64_t total = 0;
  std::uint64_t seed = 0;

  JointDistribution to_joint(double bin_width_a = 1.0, double bin_width_b = 1.0) const;
};

/// Multinomial draw of total coincidences from a normalized joint, using a
/// std::mt19937_64 seeded with seed. Identical seeds give identical counts.
CountMatrix sample_counts(const JointDistribution& j, std::uint64_t total, std::uint64_t seed);

inline constexpr double kDefaultThresholdFraction = 0.1;

/// Zeroes entries below fraction * max and renormalizes.
JointDistribution threshold_renormalize(const JointDistribution& j,
                                        double fraction = kDefaultThresholdFraction);

}  // namespace fanosteer
