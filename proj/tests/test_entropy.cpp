#include "fanosteer/entropy.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace fanosteer {
namespace {

JointDistribution joint(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return JointDistribution::from_probabilities(m);
}

TEST(BinaryEntropy, Values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.694), oracle::h2(0.694), 1e-14);
  // 0.88850...; quoted elsewhere as 0.8887, hence the looser bound here.
  EXPECT_NEAR(binary_entropy(0.694), 0.8887, 1e-3);
}

TEST(BinaryEntropy, Symmetric) {
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    EXPECT_NEAR(binary_entropy(p), binary_entropy(1.0 - p), 1e-14) << p;
  }
}

TEST(BinaryEntropy, RejectsOutOfRange) {
  EXPECT_THROW(binary_entropy(-1e-3), std::domain_error);
  EXPECT_THROW(binary_entropy(1.0 + 1e-6), std::domain_error);
  EXPECT_THROW(binary_entropy(std::nan("")), std::domain_error);
}

TEST(ShannonEntropy, Values) {
  EXPECT_DOUBLE_EQ(shannon_entropy(ProbabilityVector::from_probabilities({0.25, 0.25, 0.25, 0.25})), 2.0);
  EXPECT_EQ(shannon_entropy(ProbabilityVector::from_probabilities({0.0, 1.0, 0.0})), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy(ProbabilityVector::from_probabilities({0.5, 0.25, 0.25})), 1.5);
}

TEST(ProbabilityVector, Normalization) {
  const auto p = ProbabilityVector::from_probabilities({0.5, 0.5 + 1e-12});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_THROW(ProbabilityVector::from_probabilities({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(ProbabilityVector::from_probabilities({1.5, -0.5}), std::invalid_argument);

  const std::vector<double> counts{2, 6, 0, 2};
  const auto c = ProbabilityVector::from_counts(counts, 0.5);
  EXPECT_DOUBLE_EQ(c[1], 0.6);
  EXPECT_EQ(c.total().value(), 10.0);
  EXPECT_EQ(c.bin_width().value(), 0.5);
}

TEST(JointDistribution, Validation) {
  EXPECT_THROW((void)JointDistribution(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 0.5, -0.1, 0.3, 0.3;
  EXPECT_THROW((void)JointDistribution(neg), std::invalid_argument);
  Eigen::MatrixXd bad(1, 2);
  bad << 0.5, 0.6;
  EXPECT_THROW(JointDistribution::from_probabilities(bad), std::invalid_argument);
  // Entropy needs a normalized joint.
  Eigen::MatrixXd half = Eigen::MatrixXd::Constant(2, 2, 0.125);
  EXPECT_THROW(conditional_entropy(JointDistribution(half)), std::invalid_argument);
}

TEST(ConditionalEntropy, Examples) {
  const auto uniform = JointDistribution::from_probabilities(Eigen::MatrixXd::Constant(4, 4, 1.0 / 16));
  EXPECT_NEAR(conditional_entropy(uniform), 2.0, 1e-12);
  EXPECT_NEAR(conditional_entropy(JointDistribution::from_probabilities(Eigen::MatrixXd::Identity(3, 3) / 3.0)),
              0.0, 1e-15);
  EXPECT_NEAR(conditional_entropy(joint({{0.4, 0.1}, {0.1, 0.4}})), oracle::h2(0.8), 1e-12);
  EXPECT_NEAR(conditional_entropy(joint({{0.4, 0.1}, {0.1, 0.4}})), 0.7219, 1e-4);
}

TEST(MutualInformation, Examples) {
  const auto product = JointDistribution::from_probabilities(
      Eigen::Vector3d(0.2, 0.3, 0.5) * Eigen::RowVector2d(0.1, 0.9));
  EXPECT_NEAR(mutual_information(product), 0.0, 1e-9);
  for (int n : {2, 5, 16}) {
    const auto diag = JointDistribution::from_probabilities(Eigen::MatrixXd::Identity(n, n) / n);
    EXPECT_NEAR(mutual_information(diag), std::log2(n), 1e-12);
  }
  EXPECT_NEAR(mutual_information(joint({{0.4, 0.1}, {0.1, 0.4}})), 1.0 - oracle::h2(0.8), 1e-12);
  EXPECT_NEAR(mutual_information(joint({{0.4, 0.1}, {0.1, 0.4}})), 0.2781, 1e-4);
}

TEST(ConditionalEntropy, RandomAgainstOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int ra = 1 + static_cast<int>(rng() % 12), cb = 1 + static_cast<int>(rng() % 12);
    Eigen::MatrixXd m(ra, cb);
    for (int i = 0; i < ra; ++i)
      for (int j = 0; j < cb; ++j) m(i, j) = u(rng) < 0.3 ? 0.0 : u(rng);
    if (m.sum() == 0.0) m(0, 0) = 1.0;
    const auto j = JointDistribution::from_probabilities(m / m.sum());
    EXPECT_NEAR(conditional_entropy(j), oracle::conditional_entropy(m), 1e-10);
    EXPECT_LE(conditional_entropy(j), shannon_entropy(j.marginal_b()) + 1e-12);
    EXPECT_GE(mutual_information(j), 0.0);
    EXPECT_NEAR(joint_entropy(j) - shannon_entropy(j.marginal_a()), conditional_entropy(j), 1e-10);
  }
}

TEST(DifferentialEntropy, Values) {
  EXPECT_DOUBLE_EQ(differential_entropy_upper_estimate(2.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(differential_entropy_upper_estimate(3.0, 0.5), 2.0);
  const double h = 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(gaussian_differential_entropy(1.0), h, 1e-14);
  EXPECT_NEAR(gaussian_differential_entropy(1.0), 2.0471, 1e-4);
  EXPECT_NEAR(gaussian_differential_entropy(2.0), h + 1.0, 1e-14);
  EXPECT_NEAR(gaussian_differential_entropy(0.5), h - 1.0, 1e-14);
}

TEST(DifferentialEntropy, BinnedGaussianGapShrinks) {
  const double h = gaussian_differential_entropy(1.0);
  double previous_gap = 1e9;
  for (double delta : {1.0, 0.5, 0.1, 0.01}) {
    const auto p = ProbabilityVector::from_probabilities(oracle::binned_unit_gaussian(delta));
    const double gap = differential_entropy_upper_estimate(shannon_entropy(p), delta) - h;
    EXPECT_GE(gap, 0.0) << delta;
    EXPECT_LT(gap, previous_gap) << delta;
    previous_gap = gap;
  }
  EXPECT_LT(previous_gap, 1e-4);
}

TEST(GeometricBound, Values) {
  EXPECT_EQ(geometric_entropy_bound(1.0), 0.0);
  EXPECT_DOUBLE_EQ(geometric_entropy_bound(0.5), 2.0);
  EXPECT_NEAR(geometric_entropy_bound(0.952), 0.2919, 1e-4);
  EXPECT_THROW(geometric_entropy_bound(0.0), std::domain_error);
  EXPECT_THROW(geometric_entropy_bound(1.5), std::domain_error);
}

TEST(GeometricBound, MatchesSummedSeries) {
  for (double mu : {0.1, 0.25, 0.5, 0.9, 0.952, 0.997}) {
    EXPECT_NEAR(geometric_entropy_bound(mu), oracle::geometric_entropy(mu), 1e-9) << mu;
  }
}

TEST(GeometricBound, RandomDistributionsWithBoundedMean) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int accepted = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    const double mu = 0.05 + 0.95 * u(rng);
    const int support = 1 + static_cast<int>(rng() % 40);
    std::vector<double> tail(static_cast<std::size_t>(support));
    // Alternate between arbitrary tails and jittered geometric ones.
    for (std::size_t i = 0; i < tail.size(); ++i) {
      tail[i] = trial % 2 ? u(rng) : std::pow(1.0 - mu, static_cast<double>(i)) * (0.5 + u(rng));
    }
    double s = 0.0, mean = 0.0;
    for (double t : tail) s += t;
    for (std::size_t i = 0; i < tail.size(); ++i) {
      tail[i] *= (1.0 - mu) / s;
      mean += tail[i] * static_cast<double>(i + 1);
    }
    if (mean > (1.0 - mu) / mu) continue;
    ++accepted;
    std::vector<double> p{mu};
    p.insert(p.end(), tail.begin(), tail.end());
    EXPECT_LE(oracle::entropy(p), geometric_entropy_bound(mu) + 1e-12) << mu;
  }
  EXPECT_GT(accepted, 500);
}

}  // namespace
}  // namespace fanosteer
