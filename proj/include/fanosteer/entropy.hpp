#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// Entropy kernels on classical outcome distributions. All logarithms are
// base 2, so every returned quantity is in bits.

namespace fanosteer {

inline constexpr double kNormalizationTolerance = 1e-9;

/// Discrete distribution over a single outcome axis.
///
/// Built either from probabilities (must sum to 1 within
/// kNormalizationTolerance; renormalized exactly on construction) or from raw
/// counts, which are normalized and keep their total.
class ProbabilityVector {
 public:
  static ProbabilityVector from_probabilities(std::vector<double> weights,
                                              std::optional<double> bin_width = std::nullopt);
  static ProbabilityVector from_counts(std::span<const double> counts,
                                       std::optional<double> bin_width = std::nullopt);

  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::optional<double> bin_width() const { return bin_width_; }
  /// Raw total when built from counts.
  std::optional<double> total() const { return total_; }

 private:
  ProbabilityVector(std::vector<double> w, std::optional<double> bw, std::optional<double> total)
      : weights_(std::move(w)), bin_width_(bw), total_(total) {}

  std::vector<double> weights_;
  std::optional<double> bin_width_;
  std::optional<double> total_;
};

/// Joint outcome distribution P(A = i, B = j), rows indexed by A.
///
/// Entries are nonnegative and finite. The matrix may carry less than unit
/// mass (e.g. after a loss model); entropy operations require a normalized
/// matrix and reject anything else.
class JointDistribution {
 public:
  JointDistribution(Eigen::MatrixXd matrix, double bin_width_a = 1.0, double bin_width_b = 1.0,
                    std::optional<std::uint64_t> total_counts = std::nullopt);

  /// Accepts mass within kNormalizationTolerance of 1 and renormalizes it exactly.
  static JointDistribution from_probabilities(Eigen::MatrixXd matrix, double bin_width_a = 1.0,
                                              double bin_width_b = 1.0);
  /// Normalizes a count matrix; total_counts records the original sum.
  static JointDistribution from_counts(const Eigen::MatrixXd& counts, double bin_width_a = 1.0,
                                       double bin_width_b = 1.0);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }
  double operator()(Eigen::Index a, Eigen::Index b) const { return matrix_(a, b); }
  double bin_width_a() const { return bin_width_a_; }
  double bin_width_b() const { return bin_width_b_; }
  std::optional<std::uint64_t> total_counts() const { return total_counts_; }
  bool is_square() const { return matrix_.rows() == matrix_.cols(); }

  double mass() const { return matrix_.sum(); }
  bool is_normalized() const;
  /// Copy rescaled to unit mass. Throws when the mass is zero.
  JointDistribution normalized() const;

  ProbabilityVector marginal_a() const;
  ProbabilityVector marginal_b() const;

 private:
  Eigen::MatrixXd matrix_;
  double bin_width_a_;
  double bin_width_b_;
  std::optional<std::uint64_t> total_counts_;
};

double binary_entropy(double p);

double shannon_entropy(const ProbabilityVector& d);
double joint_entropy(const JointDistribution& j);
/// H(B|A) = H(A,B) - H(A).
double conditional_entropy(const JointDistribution& j);
double mutual_information(const JointDistribution& j);

/// H + log2(bin_width): upper estimate of the differential entropy of the
/// density that was binned to produce H.
double differential_entropy_upper_estimate(double discrete_entropy, double bin_width);

/// h2(mu)/mu, the entropy of a geometric distribution on {0,1,2,...} with P(0) = mu.
double geometric_entropy_bound(double mu);

/// 0.5 * log2(2 pi e sigma^2).
double gaussian_differential_entropy(double sigma);

}  // namespace fanosteer
