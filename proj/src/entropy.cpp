#include "fanosteer/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fanosteer {
namespace {

// -p log2 p with the 0 log 0 = 0 convention.
double plogp(double p) {
  if (p <= 0.0) {
    return 0.0;
  }
  return -p * std::log2(p);
}

void check_bin_width(std::optional<double> bw) {
  if (bw && !(*bw > 0.0 && std::isfinite(*bw))) {
    throw std::invalid_argument("bin width must be positive and finite");
  }
}

void check_entries(std::span<const double> w) {
  if (w.empty()) {
    throw std::invalid_argument("distribution must have at least one outcome");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw std::invalid_argument("distribution entry " + std::to_string(i) +
                                  " is negative or not finite");
    }
  }
}

void require_normalized(const JointDistribution& j) {
  if (!j.is_normalized()) {
    throw std::invalid_argument("joint distribution is not normalized (mass " +
                                std::to_string(j.mass()) + ")");
  }
}

}  // namespace

ProbabilityVector ProbabilityVector::from_probabilities(std::vector<double> weights,
                                                        std::optional<double> bin_width) {
  check_entries(weights);
  check_bin_width(bin_width);
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  for (double& w : weights) w /= sum;
  return ProbabilityVector(std::move(weights), bin_width, std::nullopt);
}

ProbabilityVector ProbabilityVector::from_counts(std::span<const double> counts,
                                                 std::optional<double> bin_width) {
  check_entries(counts);
  check_bin_width(bin_width);
  double sum = 0.0;
  for (double c : counts) sum += c;
  if (!(sum > 0.0)) {
    throw std::invalid_argument("counts sum to zero");
  }
  std::vector<double> w(counts.begin(), counts.end());
  for (double& x : w) x /= sum;
  return ProbabilityVector(std::move(w), bin_width, sum);
}

JointDistribution::JointDistribution(Eigen::MatrixXd matrix, double bin_width_a,
                                     double bin_width_b, std::optional<std::uint64_t> total_counts)
    : matrix_(std::move(matrix)),
      bin_width_a_(bin_width_a),
      bin_width_b_(bin_width_b),
      total_counts_(total_counts) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    throw std::invalid_argument("joint distribution needs at least one row and column");
  }
  check_bin_width(bin_width_a_);
  check_bin_width(bin_width_b_);
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix_.cols(); ++c) {
      const double v = matrix_(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("joint entry (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") is negative or not finite");
      }
    }
  }
}

JointDistribution JointDistribution::from_probabilities(Eigen::MatrixXd matrix, double bin_width_a,
                                                        double bin_width_b) {
  JointDistribution j(std::move(matrix), bin_width_a, bin_width_b);
  if (std::abs(j.mass() - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("joint probabilities sum to " + std::to_string(j.mass()) +
                                ", not 1");
  }
  // Deviations at summation round-off are left alone so stored matrices
  // load back bit for bit.
  const double roundoff = static_cast<double>(j.matrix().size()) * 2.3e-16;
  if (std::abs(j.mass() - 1.0) <= roundoff) {
    return j;
  }
  return j.normalized();
}

JointDistribution JointDistribution::from_counts(const Eigen::MatrixXd& counts, double bin_width_a,
                                                 double bin_width_b) {
  JointDistribution raw(counts, bin_width_a, bin_width_b);
  const double total = raw.mass();
  if (!(total > 0.0)) {
    throw std::invalid_argument("count matrix is empty");
  }
  return JointDistribution(counts / total, bin_width_a, bin_width_b,
                           static_cast<std::uint64_t>(std::llround(total)));
}

bool JointDistribution::is_normalized() const {
  return std::abs(mass() - 1.0) <= kNormalizationTolerance;
}

JointDistribution JointDistribution::normalized() const {
  const double m = mass();
  if (!(m > 0.0)) {
    throw std::invalid_argument("cannot normalize a joint distribution with zero mass");
  }
  return JointDistribution(matrix_ / m, bin_width_a_, bin_width_b_, total_counts_);
}

ProbabilityVector JointDistribution::marginal_a() const {
  const Eigen::VectorXd rows = matrix_.rowwise().sum();
  return ProbabilityVector::from_counts(std::span<const double>(rows.data(), rows.size()),
                                        bin_width_a_);
}

ProbabilityVector JointDistribution::marginal_b() const {
  const Eigen::RowVectorXd cols = matrix_.colwise().sum();
  return ProbabilityVector::from_counts(std::span<const double>(cols.data(), cols.size()),
                                        bin_width_b_);
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("binary_entropy: p = " + std::to_string(p) + " outside [0,1]");
  }
  return plogp(p) + plogp(1.0 - p);
}

double shannon_entropy(const ProbabilityVector& d) {
  // Both factories leave the weights at unit mass.
  double h = 0.0;
  for (double p : d.weights()) h += plogp(p);
  return h;
}

double joint_entropy(const JointDistribution& j) {
  require_normalized(j);
  double h = 0.0;
  const auto& m = j.matrix();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) h += plogp(m(r, c));
  }
  return h;
}

double conditional_entropy(const JointDistribution& j) {
  require_normalized(j);
  // Summed row by row as sum_a P(a) H(B | A = a) to avoid cancellation
  // between two large joint and marginal entropies.
  const auto& m = j.matrix();
  double h = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double row_mass = m.row(r).sum();
    if (row_mass <= 0.0) continue;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double p = m(r, c);
      if (p > 0.0) h -= p * std::log2(p / row_mass);
    }
  }
  return std::max(h, 0.0);
}

double mutual_information(const JointDistribution& j) {
  require_normalized(j);
  const auto& m = j.matrix();
  const Eigen::VectorXd pa = m.rowwise().sum();
  const Eigen::RowVectorXd pb = m.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double p = m(r, c);
      if (p > 0.0) mi += p * std::log2(p / (pa(r) * pb(c)));
    }
  }
  return std::max(mi, 0.0);
}

double differential_entropy_upper_estimate(double discrete_entropy, double bin_width) {
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("bin width must be positive");
  }
  return discrete_entropy + std::log2(bin_width);
}

double geometric_entropy_bound(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw std::domain_error("geometric_entropy_bound: mu = " + std::to_string(mu) +
                            " outside (0,1]");
  }
  return binary_entropy(mu) / mu;
}

double gaussian_differential_entropy(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
}

}  // namespace fanosteer
