#pragma once

#include "fanosteer/bounds.hpp"
#include "fanosteer/entropy.hpp"
#include "fanosteer/gaussian_fit.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fanosteer {

/// Relabeling of B outcomes against A outcomes: A outcome a is paired with B
/// outcome pairing[a].
struct Ordering {
  enum class Kind { identity, reversed, permutation };

  Kind kind = Kind::identity;
  std::vector<int> pairing;

  static Ordering identity(int n);
  static Ordering reversed(int n);
  /// Classifies the pairing; throws unless it is a bijection on 0..n-1.
  static Ordering from_pairing(std::vector<int> pairing);
};

std::string to_string(Ordering::Kind kind);

struct Agreement {
  double probability = 0.0;
  Ordering ordering;
};

double agreement_identity(const JointDistribution& j);
double agreement_reversed(const JointDistribution& j);
double agreement_under(const JointDistribution& j, const Ordering& ordering);
/// Largest diagonal sum over all relabelings of B, via an assignment solve.
Agreement agreement_best_ordering(const JointDistribution& j);

struct DomainEstimate {
  double mu = 1.0;
  GaussianFit fit;
};

/// Fits a Gaussian to a marginal histogram and returns the fraction of the
/// fitted Gaussian's area that falls on the centered window of
/// window_bin_count bins.
DomainEstimate domain_probability_from_fit(const ProbabilityVector& marginal,
                                           int window_bin_count);

/// mu * fill * efficiency.
double effective_domain(double mu, double fill, double efficiency);

/// Delta-method standard deviation of fano_steering_lhs, with each eta_bar
/// treated as a binomial proportion over its coincidence count.
double lhs_std(const CorrelationStats& s, int n_bar);

/// Largest argument of h2 used when differentiating; keeps log((1-p)/p) finite.
inline constexpr double kDerivativeClamp = 1e-12;

struct HedgeMode {
  enum class Kind { common, position, momentum };
  Kind kind = Kind::common;
  /// Domain probability of the axis that is not scanned (position/momentum modes).
  double fixed_mu = 1.0;
};

inline constexpr double kHedgeStep = 1e-4;

/// Smallest domain probability (on the scanned axis or axes) that still
/// certifies, found by stepping down from 1 in kHedgeStep increments.
/// Throws when nothing certifies at mu = 1.
double hedge_min_domain(double eta_x_bar, double eta_k_bar, int n_bar, double rhs_bits,
                        HedgeMode mode = {});

struct ContourGrid {
  std::vector<double> eta_x_values;
  std::vector<double> eta_k_values;
  Eigen::MatrixXd violation;             // rows: eta_x, cols: eta_k
  std::optional<Eigen::MatrixXd> sigma;  // present when counts are given
};

struct CountPair {
  std::uint64_t x = 0;
  std::uint64_t k = 0;
};

/// Violation of the Fano steering bound over the applicable square
/// [1/(2 mu_x), 1] x [1/(2 mu_k), 1]. mu values are used as given.
ContourGrid contour_grid(const DetectorGeometry& g, double mu_x, double mu_k, int resolution,
                         std::optional<CountPair> counts = std::nullopt);

struct LevelPoint {
  double eta_x = 0.0;
  double eta_k = 0.0;
};

/// Points where violation - sigma_multiple * sigma changes sign along each
/// eta_x row, located by linear interpolation in eta_k. A multiple of zero
/// traces the certification threshold and needs no sigma.
std::vector<LevelPoint> level_crossings(const ContourGrid& grid, double sigma_multiple = 0.0);

}  // namespace fanosteer
