#include "fanosteer/stats.hpp"

#include "fanosteer/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fanosteer {
namespace {

void require_square(const JointDistribution& j) {
  if (!j.is_square()) {
    throw std::invalid_argument("agreement needs a square joint distribution, got " +
                                std::to_string(j.rows()) + "x" + std::to_string(j.cols()));
  }
}

// Diagonal sums of a normalized joint can overshoot 1 by round-off.
double as_probability(const JointDistribution& j, double sum) {
  return j.is_normalized() ? std::min(sum, 1.0) : sum;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

Ordering Ordering::identity(int n) {
  Ordering o{Kind::identity, std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) o.pairing[static_cast<std::size_t>(i)] = i;
  return o;
}

Ordering Ordering::reversed(int n) {
  Ordering o{Kind::reversed, std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) o.pairing[static_cast<std::size_t>(i)] = n - 1 - i;
  return o;
}

Ordering Ordering::from_pairing(std::vector<int> pairing) {
  const int n = static_cast<int>(pairing.size());
  std::vector<char> seen(pairing.size(), 0);
  bool is_identity = true, is_reversed = true;
  for (int i = 0; i < n; ++i) {
    const int b = pairing[static_cast<std::size_t>(i)];
    if (b < 0 || b >= n || seen[static_cast<std::size_t>(b)]) {
      throw std::invalid_argument("ordering is not a bijection");
    }
    seen[static_cast<std::size_t>(b)] = 1;
    is_identity = is_identity && b == i;
    is_reversed = is_reversed && b == n - 1 - i;
  }
  // A single outcome is both; report it as identity.
  const Kind kind = is_identity ? Kind::identity : is_reversed ? Kind::reversed : Kind::permutation;
  return Ordering{kind, std::move(pairing)};
}

std::string to_string(Ordering::Kind kind) {
  switch (kind) {
    case Ordering::Kind::identity: return "identity";
    case Ordering::Kind::reversed: return "reversed";
    case Ordering::Kind::permutation: return "permutation";
  }
  return "unknown";
}

double agreement_identity(const JointDistribution& j) {
  require_square(j);
  return as_probability(j, j.matrix().diagonal().sum());
}

double agreement_reversed(const JointDistribution& j) {
  require_square(j);
  return as_probability(j, j.matrix().rowwise().reverse().diagonal().sum());
}

double agreement_under(const JointDistribution& j, const Ordering& ordering) {
  require_square(j);
  if (static_cast<Eigen::Index>(ordering.pairing.size()) != j.rows()) {
    throw std::invalid_argument("ordering size does not match the joint distribution");
  }
  double sum = 0.0;
  for (Eigen::Index a = 0; a < j.rows(); ++a) {
    sum += j(a, ordering.pairing[static_cast<std::size_t>(a)]);
  }
  return as_probability(j, sum);
}

Agreement agreement_best_ordering(const JointDistribution& j) {
  require_square(j);
  Ordering ordering = Ordering::from_pairing(solve_max_assignment(j.matrix()));
  const double p = agreement_under(j, ordering);
  return Agreement{p, std::move(ordering)};
}

DomainEstimate domain_probability_from_fit(const ProbabilityVector& marginal,
                                           int window_bin_count) {
  const int size = static_cast<int>(marginal.size());
  if (window_bin_count < 1 || window_bin_count > size) {
    throw std::invalid_argument("window of " + std::to_string(window_bin_count) +
                                " bins does not fit a marginal of " + std::to_string(size));
  }
  const GaussianFit fit = fit_gaussian(marginal.weights());
  // Bin i covers [i - 1/2, i + 1/2] in index units.
  const int start = (size - window_bin_count) / 2;
  const double lo = start - 0.5;
  const double hi = start + window_bin_count - 0.5;
  const double mu = normal_cdf((hi - fit.mean) / fit.sigma) - normal_cdf((lo - fit.mean) / fit.sigma);
  return DomainEstimate{std::clamp(mu, 0.0, 1.0), fit};
}

double effective_domain(double mu, double fill, double efficiency) {
  for (double v : {mu, fill, efficiency}) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw std::domain_error("effective_domain: arguments must lie in (0,1], got " +
                              std::to_string(v));
    }
  }
  return mu * fill * efficiency;
}

double lhs_std(const CorrelationStats& s, int n_bar) {
  s.validate();
  if (!s.n_coinc_x || !s.n_coinc_k) {
    throw std::invalid_argument("lhs_std needs coincidence counts for both quadratures");
  }
  if (n_bar < 2) {
    throw std::invalid_argument("n_bar must be at least 2");
  }
  const double log_n = std::log2(n_bar - 1.0);
  auto term = [&](double eta, double mu, std::uint64_t n) {
    const double a = std::clamp(eta * mu, kDerivativeClamp, 1.0 - kDerivativeClamp);
    const double slope = mu * (std::log2((1.0 - a) / a) - log_n);
    const double var = eta * (1.0 - eta) / static_cast<double>(n);
    return slope * slope * var;
  };
  return std::sqrt(term(s.eta_x_bar, s.mu_x, *s.n_coinc_x) +
                   term(s.eta_k_bar, s.mu_k, *s.n_coinc_k));
}

double hedge_min_domain(double eta_x_bar, double eta_k_bar, int n_bar, double rhs_bits,
                        HedgeMode mode) {
  if (!(rhs_bits > 0.0)) {
    throw std::invalid_argument("hedge needs a positive right-hand side");
  }
  auto certifies = [&](double mu) {
    CorrelationStats s{eta_x_bar, eta_k_bar, mode.fixed_mu, mode.fixed_mu, {}, {}};
    switch (mode.kind) {
      case HedgeMode::Kind::common: s.mu_x = s.mu_k = mu; break;
      case HedgeMode::Kind::position: s.mu_x = mu; break;
      case HedgeMode::Kind::momentum: s.mu_k = mu; break;
    }
    const FanoValue lhs = fano_steering_lhs(s, n_bar);
    return lhs.applicable && rhs_bits - lhs.bits > 0.0;
  };

  if (!certifies(1.0)) {
    throw std::invalid_argument("no violation at unit domain probability; nothing to hedge");
  }
  const long steps = std::lround(1.0 / kHedgeStep);
  double last = 1.0;
  for (long i = 1; i < steps; ++i) {
    const double mu = 1.0 - static_cast<double>(i) * kHedgeStep;
    if (!certifies(mu)) break;
    last = mu;
  }
  return last;
}

ContourGrid contour_grid(const DetectorGeometry& g, double mu_x, double mu_k, int resolution,
                         std::optional<CountPair> counts) {
  if (resolution < 2) {
    throw std::invalid_argument("contour resolution must be at least 2");
  }
  const double rhs = steering_rhs(g).bits;

  auto axis = [&](double mu, const char* name) {
    if (!(mu > 0.0 && mu <= 1.0)) {
      throw std::domain_error(std::string(name) + " must lie in (0,1]");
    }
    double lo = std::max(0.5, 0.5 / mu);
    if (lo > 1.0) {
      throw std::invalid_argument(std::string("empty applicable region: ") + name + " < 1/2");
    }
    while (lo * mu < 0.5) lo = std::nextafter(lo, 2.0);
    std::vector<double> v(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
      v[static_cast<std::size_t>(i)] = lo + (1.0 - lo) * i / (resolution - 1);
    }
    v.back() = 1.0;
    return v;
  };

  ContourGrid grid;
  grid.eta_x_values = axis(mu_x, "mu_x");
  grid.eta_k_values = axis(mu_k, "mu_k");
  grid.violation.resize(resolution, resolution);
  if (counts) grid.sigma = Eigen::MatrixXd(resolution, resolution);

  // Each cell depends only on its own coordinates.
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      CorrelationStats s{grid.eta_x_values[static_cast<std::size_t>(r)],
                         grid.eta_k_values[static_cast<std::size_t>(c)], mu_x, mu_k, {}, {}};
      grid.violation(r, c) = rhs - fano_steering_lhs(s, g.n_bar).bits;
      if (counts) {
        s.n_coinc_x = counts->x;
        s.n_coinc_k = counts->k;
        (*grid.sigma)(r, c) = lhs_std(s, g.n_bar);
      }
    }
  }
  return grid;
}

std::vector<LevelPoint> level_crossings(const ContourGrid& grid, double sigma_multiple) {
  if (sigma_multiple != 0.0 && !grid.sigma) {
    throw std::invalid_argument("sigma contours need a grid evaluated with counts");
  }
  auto level = [&](Eigen::Index r, Eigen::Index c) {
    const double shift = sigma_multiple == 0.0 ? 0.0 : sigma_multiple * (*grid.sigma)(r, c);
    return grid.violation(r, c) - shift;
  };
  std::vector<LevelPoint> points;
  for (Eigen::Index r = 0; r < grid.violation.rows(); ++r) {
    for (Eigen::Index c = 0; c + 1 < grid.violation.cols(); ++c) {
      const double f0 = level(r, c);
      const double f1 = level(r, c + 1);
      if ((f0 < 0.0) == (f1 < 0.0)) continue;
      const double k0 = grid.eta_k_values[static_cast<std::size_t>(c)];
      const double k1 = grid.eta_k_values[static_cast<std::size_t>(c) + 1];
      points.push_back({grid.eta_x_values[static_cast<std::size_t>(r)],
                        k0 + (k1 - k0) * f0 / (f0 - f1)});
    }
  }
  return points;
}

}  // namespace fanosteer
