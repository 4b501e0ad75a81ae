#include "fanosteer/bounds.hpp"
#include "fanosteer/spdc_sim.hpp"
#include "fanosteer/stats.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

namespace fanosteer {
namespace {

BiphotonModel model(double sp, double sm, double extent, int pixels) {
  BiphotonModel m;
  m.sigma_plus = sp;
  m.sigma_minus = sm;
  m.grid_extent = extent;
  m.pixels_per_axis = pixels;
  return m;
}

// Pixel (i, j) of the double Gaussian by a 24 x 24 Gauss-Legendre product rule.
double pixel_oracle(double s, double d, double left, double width, int i, int j) {
  static const std::array<double, 6> x = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                          0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
  static const std::array<double, 6> w = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                          0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
  const int sub = 4;
  const double h = width / sub;
  double total = 0.0;
  for (int sa = 0; sa < sub; ++sa) {
    for (int sb = 0; sb < sub; ++sb) {
      const double ca = left + i * width + (sa + 0.5) * h;
      const double cb = left + j * width + (sb + 0.5) * h;
      for (std::size_t p = 0; p < x.size(); ++p) {
        for (std::size_t q = 0; q < x.size(); ++q) {
          const double a = ca + 0.5 * h * x[p], b = cb + 0.5 * h * x[q];
          const double f = std::exp(-(a + b) * (a + b) / (4 * s * s) - (a - b) * (a - b) / (4 * d * d)) /
                           (2 * std::numbers::pi * s * d);
          total += 0.25 * h * h * w[p] * w[q] * f;
        }
      }
    }
  }
  return total;
}

TEST(Biphoton, ModeWidths) {
  const BiphotonModel m = model(50.0, 1.0, 240.0, 32);
  EXPECT_EQ(position_mode_widths(m).sum, 50.0);
  EXPECT_EQ(position_mode_widths(m).difference, 1.0);
  EXPECT_NEAR(momentum_mode_widths(m).sum, 1.0 / 100.0, 1e-9);
  EXPECT_NEAR(momentum_mode_widths(m).difference, 0.5, 1e-9);
  EXPECT_NEAR(m.momentum_grid_extent(), 2.4, 1e-12);
  EXPECT_THROW(model(1.0, 1.0, 10.0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(model(0.0, 1.0, 10.0, 8).validate(), std::invalid_argument);
}

TEST(Biphoton, PixelIntegrationMatchesOracle) {
  const double s = 1.5, d = 0.8, extent = 8.0;
  const int n = 8;
  const JointDistribution j = integrate_double_gaussian({s, d}, extent, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      EXPECT_NEAR(j(i, k), pixel_oracle(s, d, -4.0, 1.0, i, k), 1e-9) << i << "," << k;
    }
  }
}

TEST(Biphoton, ProductStateHasNoMutualInformation) {
  for (double s : {3.0, 20.0}) {
    const BiphotonModel m = model(s, s, 8 * s, 24);
    EXPECT_NEAR(mutual_information(joint_position_distribution(m).normalized()), 0.0, 1e-6);
    EXPECT_NEAR(mutual_information(joint_momentum_distribution(m).normalized()), 0.0, 1e-6);
  }
}

TEST(Biphoton, NarrowDifferenceModeIsNearDiagonal) {
  const BiphotonModel m = model(50.0, 0.5, 240.0, 32);
  EXPECT_GT(agreement_identity(joint_position_distribution(m).normalized()), 0.9);
}

TEST(Biphoton, ExchangeSymmetric) {
  const JointDistribution j = joint_position_distribution(model(7.0, 2.0, 40.0, 20));
  EXPECT_LE((j.matrix() - j.matrix().transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Biphoton, MomentumIsAntiCorrelated) {
  const JointDistribution j = joint_momentum_distribution(model(50.0, 0.5, 240.0, 32)).normalized();
  EXPECT_GT(agreement_reversed(j), 0.9);
  EXPECT_LT(agreement_identity(j), 0.1);
}

TEST(Biphoton, AgreementGrowsWithCorrelation) {
  double last_x = 0.0, last_k = 0.0;
  for (double sm : {50.0, 25.0, 10.0, 5.0, 2.0, 1.0, 0.5}) {
    const BiphotonModel m = model(50.0, sm, 240.0, 32);
    const double ax = agreement_identity(joint_position_distribution(m).normalized());
    const double ak = agreement_reversed(joint_momentum_distribution(m).normalized());
    EXPECT_GT(ax, last_x) << sm;
    EXPECT_GT(ak, last_k) << sm;
    last_x = ax;
    last_k = ak;
  }
}

TEST(Window, MassAccounting) {
  const JointDistribution full = joint_position_distribution(model(10.0, 10.0, 80.0, 40));
  EXPECT_NEAR(truncate_to_window(full, 40).mu_true, full.mass(), 1e-15);

  // Product state with marginal sd 10, so a 20-pixel window spans +-2 sd.
  const double per_axis = oracle::normal_cdf(2.0) - oracle::normal_cdf(-2.0);
  const WindowedJoint w = truncate_to_window(full, 20);
  EXPECT_NEAR(w.mu_true, per_axis * per_axis, 1e-9);
  EXPECT_NEAR(w.joint.mass(), 1.0, 1e-12);

  double previous = 0.0;
  for (int size : {2, 6, 10, 20, 30, 40}) {
    const double mu = truncate_to_window(full, size).mu_true;
    EXPECT_GE(mu, previous);
    previous = mu;
  }
  EXPECT_THROW(truncate_to_window(full, 41), std::invalid_argument);
}

TEST(DeadSpace, UniformLoss) {
  const JointDistribution j = joint_position_distribution(model(5.0, 1.0, 30.0, 10)).normalized();
  EXPECT_EQ(apply_dead_space(j, 1.0, 1.0).matrix(), j.matrix());
  const JointDistribution lossy = apply_dead_space(j, 0.92, 0.92);
  EXPECT_NEAR(lossy.mass(), 0.8464, 1e-12);
  EXPECT_LE((lossy.normalized().matrix() - j.matrix()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_THROW(apply_dead_space(j, 0.0, 1.0), std::invalid_argument);
}

TEST(Sampling, ConvergesToDistribution) {
  Eigen::Matrix4d p;
  p << 0.10, 0.02, 0.03, 0.05, 0.01, 0.20, 0.04, 0.01, 0.06, 0.02, 0.15, 0.02, 0.03, 0.04, 0.02, 0.20;
  const auto j = JointDistribution::from_probabilities(p);
  const CountMatrix c = sample_counts(j, 10000000, 42);
  EXPECT_EQ(c.counts.sum(), 10000000u);
  const Eigen::MatrixXd freq = c.counts.cast<double>() / 1e7;
  EXPECT_LT((freq - p).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Sampling, Deterministic) {
  const auto j = joint_position_distribution(model(20.0, 1.0, 100.0, 16)).normalized();
  const CountMatrix a = sample_counts(j, 100000, 9);
  const CountMatrix b = sample_counts(j, 100000, 9);
  const CountMatrix c = sample_counts(j, 100000, 10);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
  EXPECT_EQ(a.seed, 9u);
  EXPECT_EQ(a.total, 100000u);
}

TEST(Sampling, PointMassAndErrors) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(1, 2) = 1.0;
  const CountMatrix c = sample_counts(JointDistribution::from_probabilities(m), 1234, 1);
  EXPECT_EQ(c.counts(1, 2), 1234u);
  EXPECT_EQ(c.counts.sum(), 1234u);
  m(0, 0) = 1.0;
  EXPECT_THROW(sample_counts(JointDistribution(m), 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_counts(JointDistribution::from_probabilities(m / 2), 0, 1), std::invalid_argument);

  // Zero cells at the end never receive counts.
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
  z(0, 0) = 0.5;
  z(0, 1) = 0.5;
  const CountMatrix zc = sample_counts(JointDistribution::from_probabilities(z), 1000, 3);
  EXPECT_EQ(zc.counts(1, 0) + zc.counts(1, 1), 0u);
}

TEST(Sampling, ChiSquaredWithinQuantile) {
  const auto j = joint_position_distribution(model(4.0, 1.5, 16.0, 6)).normalized();
  const int dof = static_cast<int>(j.rows() * j.cols()) - 1;
  const double limit = boost::math::quantile(boost::math::chi_squared(dof), 0.999);
  const std::uint64_t total = 50000;
  int within = 0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    const CountMatrix c = sample_counts(j, total, static_cast<std::uint64_t>(seed));
    double chi2 = 0.0;
    for (Eigen::Index a = 0; a < j.rows(); ++a) {
      for (Eigen::Index b = 0; b < j.cols(); ++b) {
        const double expected = j(a, b) * static_cast<double>(total);
        const double d = static_cast<double>(c.counts(a, b)) - expected;
        chi2 += d * d / expected;
      }
    }
    within += chi2 <= limit;
  }
  EXPECT_GE(within, 0.95 * seeds);
}

TEST(Threshold, Examples) {
  const auto diag = JointDistribution::from_probabilities(Eigen::MatrixXd::Identity(4, 4) / 4.0);
  EXPECT_EQ(threshold_renormalize(diag).matrix(), diag.matrix());

  const int n = 256;
  Eigen::MatrixXd noisy = Eigen::MatrixXd::Constant(n, n, 0.1 / (n * n));
  noisy.diagonal().array() += 0.9 / n;
  const JointDistribution cleaned = threshold_renormalize(JointDistribution::from_probabilities(noisy));
  EXPECT_EQ((cleaned.matrix().array() > 0.0).count(), n);
  EXPECT_LE((cleaned.matrix() - Eigen::MatrixXd::Identity(n, n) / n).cwiseAbs().maxCoeff(), 1e-15);

  const auto j = joint_position_distribution(model(5.0, 1.0, 30.0, 10)).normalized();
  EXPECT_EQ(threshold_renormalize(j, 0.0).matrix(), j.matrix());
  EXPECT_THROW(threshold_renormalize(j, 1.5), std::invalid_argument);
  EXPECT_THROW(threshold_renormalize(JointDistribution(Eigen::MatrixXd::Zero(2, 2))), std::invalid_argument);
}

TEST(Soundness, ModifiedFanoBoundsFullJoint) {
  int checked = 0;
  for (double ratio : {10.0, 30.0, 60.0}) {
    for (int window : {8, 12, 16}) {
      for (const bool momentum : {false, true}) {
        const BiphotonModel m = model(ratio, 1.0, 4.8 * ratio, 24);
        const JointDistribution full =
            momentum ? joint_momentum_distribution(m) : joint_position_distribution(m);
        const WindowedJoint w = truncate_to_window(full, window);
        const double mu = w.mu_true / full.mass();
        const double eta = agreement_best_ordering(w.joint).probability;
        if (eta * mu < 0.5) continue;
        ++checked;
        const FanoValue bound = modified_fano_bound(eta, mu, window);
        EXPECT_TRUE(bound.applicable);
        EXPECT_GE(bound.bits, oracle::conditional_entropy(full.matrix())) << ratio << " " << window;
      }
    }
  }
  EXPECT_GT(checked, 6);
}

}  // namespace
}  // namespace fanosteer
