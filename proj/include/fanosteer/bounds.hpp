#pragma once

#include "fanosteer/entropy.hpp"

#include <cstdint>
#include <optional>

namespace fanosteer {

/// Detector discretization and loss model for one position/momentum pair.
///
/// delta_x * delta_k is the dimensionless bin-area product that sets the
/// steering bound. n_bar is the pixel count of each viewing window, shared by
/// the position and momentum measurements.
struct DetectorGeometry {
  double delta_x = 1.0;
  double delta_k = 1.0;
  int n_bar = 2;
  double fill_x = 1.0;
  double fill_k = 1.0;
  double efficiency = 1.0;
  int dims = 1;

  void validate() const;

  /// Geometry whose bin product reproduces a known right-hand side:
  /// delta_x = 1, delta_k = pi e / 2^(rhs_bits / dims).
  static DetectorGeometry from_rhs_bits(double rhs_bits, int n_bar, int dims = 1);
};

/// Agreement and domain probabilities measured for both quadratures.
///
/// mu_x, mu_k are the domain probabilities actually used by the bound; fill
/// factors and efficiency must already be folded in (see effective_domain).
struct CorrelationStats {
  double eta_x_bar = 0.0;
  double eta_k_bar = 0.0;
  double mu_x = 1.0;
  double mu_k = 1.0;
  std::optional<std::uint64_t> n_coinc_x;
  std::optional<std::uint64_t> n_coinc_k;

  void validate() const;
};

/// A Fano-type upper bound on a conditional entropy plus its validity flag
/// (eta_bar * mu >= 1/2).
struct FanoValue {
  double bits = 0.0;
  bool applicable = true;
};

struct SteeringRhs {
  double bits = 0.0;
  /// False when the bin product is at or above pi e, so nothing can violate.
  bool certifiable = true;
};

/// Comparison of the two sides of a steering inequality.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;  // rhs - lhs
  std::optional<double> sigma;
  bool applicable = true;

  static BoundReport make(double lhs, double rhs, bool applicable) {
    return BoundReport{lhs, rhs, rhs - lhs, std::nullopt, applicable};
  }
  bool certifies() const { return applicable && violation > 0.0; }
};

struct KeyRateBound {
  double bits = 0.0;
  bool applicable = true;
  bool certified() const { return applicable && bits >= 0.0; }
};

/// Standard Fano bound h2(eta) + (1 - eta) log2(n - 1) on H(B|A) for n outcomes.
double fano_bound(double eta, int n);

/// Fano bound for a viewing window of n_bar outcomes that holds a fraction mu
/// of all coincidences, with eta_bar the in-window agreement probability.
FanoValue modified_fano_bound(double eta_bar, double mu, int n_bar);

SteeringRhs steering_rhs(const DetectorGeometry& g);

/// Upper bound on H(X_B|X_A) + H(K_B|K_A) from agreement/domain statistics.
FanoValue fano_steering_lhs(const CorrelationStats& s, int n_bar);

BoundReport steering_certificate(const CorrelationStats& s, const DetectorGeometry& g);

/// Same inequality evaluated with the brute-force conditional entropies of
/// the full joint distributions. Never less sharp than the Fano route.
BoundReport discrete_steering_check(const JointDistribution& jx, const JointDistribution& jk,
                                    const DetectorGeometry& g);

/// Lower bound on the one-way secret key rate per measurement pair.
KeyRateBound secret_key_rate(const CorrelationStats& s, const DetectorGeometry& g);

}  // namespace fanosteer
