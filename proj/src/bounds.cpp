#include "fanosteer/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fanosteer {
namespace {

constexpr double kPiE = std::numbers::pi * std::numbers::e;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
bool in_unit_interval_open_left(double p) { return p > 0.0 && p <= 1.0; }

void check_probability(double p, const char* name) {
  if (!is_probability(p)) {
    throw std::domain_error(std::string(name) + " = " + std::to_string(p) + " outside [0,1]");
  }
}

}  // namespace

void DetectorGeometry::validate() const {
  if (!(delta_x > 0.0) || !(delta_k > 0.0)) {
    throw std::invalid_argument("bin widths must be positive");
  }
  if (n_bar < 2) {
    throw std::invalid_argument("n_bar must be at least 2");
  }
  if (!in_unit_interval_open_left(fill_x) || !in_unit_interval_open_left(fill_k)) {
    throw std::invalid_argument("fill factors must lie in (0,1]");
  }
  if (!in_unit_interval_open_left(efficiency)) {
    throw std::invalid_argument("efficiency must lie in (0,1]");
  }
  if (dims < 1) {
    throw std::invalid_argument("dims must be at least 1");
  }
}

DetectorGeometry DetectorGeometry::from_rhs_bits(double rhs_bits, int n_bar, int dims) {
  if (dims < 1) {
    throw std::invalid_argument("dims must be at least 1");
  }
  DetectorGeometry g;
  g.delta_x = 1.0;
  g.delta_k = kPiE / std::exp2(rhs_bits / dims);
  g.n_bar = n_bar;
  g.dims = dims;
  g.validate();
  return g;
}

void CorrelationStats::validate() const {
  check_probability(eta_x_bar, "eta_x_bar");
  check_probability(eta_k_bar, "eta_k_bar");
  check_probability(mu_x, "mu_x");
  check_probability(mu_k, "mu_k");
  if ((n_coinc_x && *n_coinc_x == 0) || (n_coinc_k && *n_coinc_k == 0)) {
    throw std::invalid_argument("coincidence counts must be positive when given");
  }
}

double fano_bound(double eta, int n) {
  if (n < 2) {
    throw std::invalid_argument("fano_bound: need at least 2 outcomes");
  }
  check_probability(eta, "eta");
  return binary_entropy(eta) + (1.0 - eta) * std::log2(n - 1.0);
}

FanoValue modified_fano_bound(double eta_bar, double mu, int n_bar) {
  if (n_bar < 2) {
    throw std::invalid_argument("modified_fano_bound: need at least 2 outcomes");
  }
  check_probability(eta_bar, "eta_bar");
  check_probability(mu, "mu");
  if (mu == 0.0) {
    throw std::domain_error("modified_fano_bound: domain probability is zero");
  }
  const double agreement = eta_bar * mu;
  // Grouped so that mu = 1 reproduces fano_bound bit for bit.
  const double bits =
      (binary_entropy(agreement) + geometric_entropy_bound(mu)) +
      (1.0 - agreement) * std::log2(n_bar - 1.0);
  return FanoValue{bits, agreement >= 0.5};
}

SteeringRhs steering_rhs(const DetectorGeometry& g) {
  g.validate();
  const double bits = g.dims * std::log2(kPiE / (g.delta_x * g.delta_k));
  return SteeringRhs{bits, bits > 0.0};
}

FanoValue fano_steering_lhs(const CorrelationStats& s, int n_bar) {
  s.validate();
  const FanoValue x = modified_fano_bound(s.eta_x_bar, s.mu_x, n_bar);
  const FanoValue k = modified_fano_bound(s.eta_k_bar, s.mu_k, n_bar);
  return FanoValue{x.bits + k.bits, x.applicable && k.applicable};
}

BoundReport steering_certificate(const CorrelationStats& s, const DetectorGeometry& g) {
  const SteeringRhs rhs = steering_rhs(g);
  const FanoValue lhs = fano_steering_lhs(s, g.n_bar);
  return BoundReport::make(lhs.bits, rhs.bits, lhs.applicable);
}

BoundReport discrete_steering_check(const JointDistribution& jx, const JointDistribution& jk,
                                    const DetectorGeometry& g) {
  const SteeringRhs rhs = steering_rhs(g);
  const double lhs = conditional_entropy(jx) + conditional_entropy(jk);
  return BoundReport::make(lhs, rhs.bits, true);
}

KeyRateBound secret_key_rate(const CorrelationStats& s, const DetectorGeometry& g) {
  // rhs - (x + k) rounds identically to the certificate's violation.
  const SteeringRhs rhs = steering_rhs(g);
  const FanoValue lhs = fano_steering_lhs(s, g.n_bar);
  return KeyRateBound{rhs.bits - lhs.bits, lhs.applicable};
}

}  // namespace fanosteer
