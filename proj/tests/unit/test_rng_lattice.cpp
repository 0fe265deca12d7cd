#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "filterlab/error.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/rng.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {
namespace {

TEST(Eta, FloorsToGrid) {
  EXPECT_DOUBLE_EQ(eta(4, 0.3), 0.25);
  EXPECT_DOUBLE_EQ(eta(8, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(eta(5, 0.2), 0.2);
}

TEST(PowerOfTwo, Detects) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_TRUE(is_power_of_two(4096));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(96));
}

TEST(DeriveSeed, PureAndStreamSeparated) {
  EXPECT_EQ(derive_seed(7, Stream::particle, 3, 1), derive_seed(7, Stream::particle, 3, 1));
  EXPECT_NE(derive_seed(7, Stream::particle, 3, 1), derive_seed(7, Stream::particle, 3, 0));
  EXPECT_NE(derive_seed(7, Stream::particle, 3, 1), derive_seed(7, Stream::inner, 3, 1));
  EXPECT_NE(derive_seed(7, Stream::particle, 3, 1), derive_seed(8, Stream::particle, 3, 1));
}

TEST(Lattice, SameSeedSameIncrements) {
  const BrownianLattice a = sample_lattice(2, 3, 64, 11, 5);
  const BrownianLattice b = sample_lattice(2, 3, 64, 11, 5);
  EXPECT_EQ(a.dB, b.dB);
  EXPECT_EQ(a.dW, b.dW);
  const BrownianLattice c = sample_lattice(2, 3, 64, 11, 6);
  EXPECT_NE(a.dW, c.dW);
  EXPECT_EQ(a.dB.size(), 64u * 2);
  EXPECT_EQ(a.dW.size(), 64u * 3);
}

TEST(Lattice, RejectsNonPowerOfTwo) {
  EXPECT_THROW(sample_lattice(1, 1, 48, 1, 0), ConfigError);
}

TEST(Lattice, TerminalValueMomentsMatchBrownianMotion) {
  const std::size_t paths = 100000;
  const std::size_t d = 2;
  std::vector<double> w1(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianLattice l = sample_lattice(1, d, 8, 2024, p);
    double s = 0.0;
    for (std::size_t k = 0; k < l.n_fine; ++k) s += l.dW[k * d + 1];
    w1[p] = s;
  }
  const Moments m = moments(w1);
  EXPECT_LE(std::abs(m.mean), 3.0 * m.mean_se);
  EXPECT_NEAR(m.variance, 1.0, 0.02);
}

TEST(Coarsen, IdentityAtFineLevel) {
  const BrownianLattice l = sample_lattice(2, 1, 32, 3, 0);
  const CoarseIncrements c = coarsen(l, 32);
  EXPECT_EQ(c.dB, l.dB);
  EXPECT_EQ(c.dW, l.dW);
}

TEST(Coarsen, TelescopesToTerminalValue) {
  const BrownianLattice l = sample_lattice(1, 2, 256, 3, 1);
  for (std::size_t n : {1u, 4u, 32u, 128u}) {
    const CoarseIncrements c = coarsen(l, n);
    for (std::size_t j = 0; j < 2; ++j) {
      double fine = 0.0, coarse = 0.0;
      for (std::size_t k = 0; k < l.n_fine; ++k) fine += l.dW[k * 2 + j];
      for (std::size_t i = 0; i < n; ++i) coarse += c.dW[i * 2 + j];
      EXPECT_NEAR(coarse, fine, 1e-12) << "n=" << n;
    }
  }
}

TEST(Coarsen, BlockSumsAreAssociative) {
  const BrownianLattice l = sample_lattice(2, 1, 128, 9, 2);
  const CoarseIncrements c8 = coarsen(l, 8);
  const CoarseIncrements c16 = coarsen(l, 16);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t q = 0; q < 2; ++q) {
      EXPECT_NEAR(c8.dB[i * 2 + q], c16.dB[(2 * i) * 2 + q] + c16.dB[(2 * i + 1) * 2 + q],
                  1e-13);
    }
  }
}

TEST(Coarsen, RejectsNonDivisor) {
  const BrownianLattice l = sample_lattice(1, 1, 64, 1, 0);
  EXPECT_THROW(coarsen(l, 24), ConfigError);
}

TEST(Observation, BrownianObservationIsRunningSum) {
  const BrownianLattice l = sample_lattice(1, 2, 16, 4, 0);
  const ObservationPath y = brownian_observation(l);
  EXPECT_EQ(y.dY, l.dW);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(y.Y_at(0)[j], 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < 16; ++k) s += l.dW[k * 2 + 1];
  EXPECT_NEAR(y.Y_at(16)[1], s, 1e-14);
}

}  // namespace
}  // namespace filterlab
