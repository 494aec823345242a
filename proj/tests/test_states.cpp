#include <cmath>

#include <gtest/gtest.h>

#include "eprtele/moments.hpp"
#include "eprtele/povm.hpp"
#include "eprtele/states.hpp"

namespace {

using namespace eprtele;

const FrequencyGrid kGrid = make_frequency_grid(900.0, 1100.0, 200);

TEST(WavePacket, NormalizedWithRealPositiveAmplitudesAtZeroDelay) {
  const WavePacket f = gaussian_packet(1000.5, 5.0, 0.0, kGrid);
  EXPECT_NEAR(squared_norm(f.amplitudes(), kGrid), 1.0, 1e-12);
  for (int i = 0; i < f.size(); ++i) {
    EXPECT_GE(f[i].real(), 0.0);
    EXPECT_EQ(f[i].imag(), 0.0);
  }
}

TEST(WavePacket, SpectralMomentsMatchParameters) {
  const double center = 1003.0, width = 5.0;
  const WavePacket f = gaussian_packet(center, width, 0.37, kGrid);
  const Moments m = moments(kGrid.points(), energy_distribution(f) * kGrid.delta_omega());
  EXPECT_NEAR(m.mass, 1.0, 1e-12);
  EXPECT_NEAR(m.mean, center, 1e-9);
  EXPECT_NEAR(m.variance / (width * width), 1.0, 5e-3);
}

TEST(WavePacket, DelayOnlyChangesPhase) {
  const WavePacket a = gaussian_packet(1000.0, 4.0, 0.0, kGrid);
  const WavePacket b = gaussian_packet(1000.0, 4.0, 0.8, kGrid);
  EXPECT_LT((a.amplitudes().cwiseAbs() - b.amplitudes().cwiseAbs()).norm(), 1e-14);
  EXPECT_NEAR(std::arg(b[120] / a[120]), std::remainder(-kGrid.point(120) * 0.8, kTwoPi), 1e-9);
}

TEST(WavePacket, MassOutsideGridRejected) {
  try {
    gaussian_packet(902.0, 5.0, 0.0, kGrid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassOutsideGrid);
  }
  EXPECT_THROW(gaussian_packet(1200.0, 1.0, 0.0, kGrid), Error);
}

TEST(Normalize, ScalingAndZero) {
  CVector v = CVector::Zero(kGrid.size());
  v[10] = cplx(0.0, 7.0);
  const WavePacket f = normalize(v, kGrid);
  EXPECT_NEAR(std::abs(f[10]) * std::abs(f[10]) * kGrid.delta_omega(), 1.0, 1e-14);
  EXPECT_NEAR(std::arg(f[10]), std::numbers::pi / 2.0, 1e-14);
  try {
    normalize(CVector::Zero(kGrid.size()), kGrid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(WavePacket, TemporalVarianceReciprocal) {
  // |f~(t)|^2 of a Gaussian with spectral variance w^2 has variance 1/(4 w^2).
  const FrequencyGrid g = make_frequency_grid(0.0, 256.0, 256);
  for (double w : {2.0, 4.0, 8.0}) {
    const WavePacket f = gaussian_packet(128.0, w, 0.0, g);
    const TimeGrid tg = conjugate_time_grid(g);
    const Moments m = moments(tg.points(), time_distribution(f) * tg.delta_t());
    EXPECT_NEAR(m.mass, 1.0, 1e-12);
    EXPECT_NEAR(m.variance * 4.0 * w * w, 1.0, 1e-2) << "w=" << w;
  }
}

struct EprCase {
  double mu;
  double sigma;
};

class GaussianEpr : public ::testing::TestWithParam<EprCase> {};

TEST_P(GaussianEpr, NormalizationAndVarianceIdentities) {
  const auto [mu, sigma] = GetParam();
  const FrequencyGrid g = make_frequency_grid(0.0, 200.0, 200);
  const GaussianEPRParams p{mu, sigma, 100.0, 100.0};
  const BiphotonAmplitude F = gaussian_epr_amplitude(p, g, g);
  const RMatrix joint = joint_energy_distribution(F);
  const double dw = g.delta_omega();
  EXPECT_NEAR(joint.sum() * dw * dw, 1.0, 1e-12);
  const PairMoments pm = pair_moments(g.points(), g.points(), joint * dw * dw);
  EXPECT_NEAR(pm.sum.variance / (2.0 * sigma * sigma * (1.0 + mu)), 1.0, 5e-3);
  EXPECT_NEAR(pm.difference.variance / (2.0 * sigma * sigma * (1.0 - mu)), 1.0, 5e-3);
  EXPECT_NEAR(pm.sum.mean, p.omega0(), 1e-9);
}

TEST_P(GaussianEpr, ExchangeSymmetricForEqualCenters) {
  const auto [mu, sigma] = GetParam();
  const FrequencyGrid g = make_frequency_grid(0.0, 200.0, 200);
  const BiphotonAmplitude F = gaussian_epr_amplitude({mu, sigma, 100.0, 100.0}, g, g);
  EXPECT_LT((F.values() - F.values().transpose()).norm(), 1e-12 * F.values().norm());
}

TEST_P(GaussianEpr, TimeDomainParseval) {
  const auto [mu, sigma] = GetParam();
  const FrequencyGrid g = make_frequency_grid(0.0, 200.0, 200);
  const BiphotonAmplitude F = gaussian_epr_amplitude({mu, sigma, 100.0, 100.0}, g, g);
  const double dt = conjugate_time_grid(g).delta_t();
  EXPECT_NEAR(joint_time_distribution(F).sum() * dt * dt, 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Schedule, GaussianEpr,
                         ::testing::Values(EprCase{0.0, 15.0}, EprCase{-0.5, 15.0}, EprCase{-0.9, 12.0},
                                           EprCase{0.6, 10.0}));

TEST(GaussianEpr, ZeroCorrelationFactorizes) {
  const FrequencyGrid g = make_frequency_grid(0.0, 100.0, 100);
  const BiphotonAmplitude F = gaussian_epr_amplitude({0.0, 6.0, 50.0, 50.0}, g, g);
  Eigen::JacobiSVD<CMatrix> svd(F.values());
  const auto& s = svd.singularValues();
  EXPECT_LT(s[1] / s[0], 1e-12);
}

TEST(GaussianEpr, CorrelatedHasSchmidtRankAboveOne) {
  const FrequencyGrid g = make_frequency_grid(0.0, 100.0, 100);
  const BiphotonAmplitude F = gaussian_epr_amplitude({-0.8, 6.0, 50.0, 50.0}, g, g);
  Eigen::JacobiSVD<CMatrix> svd(F.values());
  EXPECT_GT(svd.singularValues()[1] / svd.singularValues()[0], 1e-2);
}

TEST(GaussianEpr, InvalidParameters) {
  const FrequencyGrid g = make_frequency_grid(0.0, 100.0, 100);
  try {
    gaussian_epr_amplitude({1.0, 6.0, 50.0, 50.0}, g, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCorrelation);
  }
  EXPECT_THROW(gaussian_epr_amplitude({0.2, -1.0, 50.0, 50.0}, g, g), Error);
  try {
    gaussian_epr_amplitude({0.0, 6.0, 95.0, 50.0}, g, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassOutsideGrid);
  }
}

TEST(GaussianEpr, TailMassMatchesErfcForMarginal) {
  const FrequencyGrid g = make_frequency_grid(0.0, 100.0, 100);
  const GaussianEPRParams p{-0.5, 10.0, 50.0, 50.0};
  const double expected = 2.0 * std::erfc(50.0 / (10.0 * std::sqrt(2.0)));
  EXPECT_NEAR(epr_tail_mass(p, g, g), expected, 1e-3 * expected);
}

}  // namespace
