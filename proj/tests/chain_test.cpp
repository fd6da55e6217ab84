// Copyright 2026 The feynprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "feynprobe/chain.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"

using namespace feynprobe;

namespace {

// Central difference of the amplitude, independent of the analytic derivative.
Complex finite_difference(const ChainSpec& spec, int x0, int m, double lambda, double h = 1e-5) {
  return (evolve(spec, x0, lambda + h).at(m) - evolve(spec, x0, lambda - h).at(m)) / (2.0 * h);
}

}  // namespace

TEST(ChainSpec, rejects_short_chains) {
  EXPECT_THROW(ChainSpec(1), InvalidSpec);
  EXPECT_THROW(ChainSpec(0), InvalidSpec);
  EXPECT_NO_THROW(ChainSpec(2));
  EXPECT_EQ(ChainSpec().sites(), 10);
}

TEST(SpectralBasis, closed_form_energies) {
  EXPECT_NEAR(build_spectral_basis(ChainSpec(2)).energies[0], -0.5, 1e-15);
  EXPECT_NEAR(build_spectral_basis(ChainSpec(3)).energies[1], 0.0, 1e-15);
}

TEST(SpectralBasis, energies_strictly_increasing) {
  for (int s = 2; s <= 30; ++s) {
    const auto basis = build_spectral_basis(ChainSpec(s));
    for (int k = 1; k < s; ++k) EXPECT_LT(basis.energies[k - 1], basis.energies[k]) << s;
  }
}

TEST(SpectralBasis, modes_orthogonal) {
  for (int s : {2, 3, 10, 25}) {
    const auto basis = build_spectral_basis(ChainSpec(s));
    const MatrixXd gram = basis.modes.transpose() * basis.modes;
    EXPECT_LT((gram - MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff(), 1e-12) << s;
  }
}

TEST(SpectralBasis, modes_are_generator_eigenvectors) {
  for (int s : {2, 5, 10, 17}) {
    const ChainSpec spec(s);
    const auto basis = build_spectral_basis(spec);
    const MatrixXd g = generator_matrix(spec);
    for (int k = 0; k < s; ++k) {
      const Eigen::VectorXd mode = basis.modes.col(k);
      EXPECT_LT((g * mode - basis.energies[k] * mode).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(GeneratorMatrix, symmetric_tridiagonal) {
  const MatrixXd g = generator_matrix(ChainSpec(6));
  EXPECT_TRUE(g.isApprox(g.transpose()));
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double expected = std::abs(i - j) == 1 ? -0.5 : 0.0;
      EXPECT_EQ(g(i, j), expected);
    }
  }
}

TEST(Evolve, identity_at_zero) {
  const auto psi = evolve(ChainSpec(10), 3, 0.0);
  for (int j = 1; j <= 10; ++j) {
    EXPECT_NEAR(std::abs(psi.at(j) - Complex(j == 3 ? 1.0 : 0.0)), 0.0, 1e-14) << j;
  }
}

TEST(Evolve, two_site_closed_form) {
  const ChainSpec spec(2);
  for (double lambda : {0.0, 0.3, 1.0, 2.5, 7.0, 19.0}) {
    const auto psi = evolve(spec, 1, lambda);
    EXPECT_NEAR(std::abs(psi.at(1) - Complex(std::cos(lambda / 2), 0.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(psi.at(2) - Complex(0.0, std::sin(lambda / 2))), 0.0, 1e-14);
  }
}

TEST(Evolve, unitary_over_lambda_range) {
  for (int s : {2, 7, 10, 31}) {
    const ChainSpec spec(s);
    for (int x0 = 1; x0 <= s; ++x0) {
      for (double lambda = 0.0; lambda <= 20.0; lambda += 0.37) {
        EXPECT_NEAR(evolve(spec, x0, lambda).norm_squared(), 1.0, 1e-10);
      }
    }
  }
  EXPECT_NEAR(evolve(ChainSpec(10), 1, 5.0).norm_squared(), 1.0, 1e-10);
}

TEST(Evolve, rejects_bad_site) {
  const ChainSpec spec(10);
  EXPECT_THROW(evolve(spec, 0, 1.0), IndexError);
  EXPECT_THROW(evolve(spec, 11, 1.0), IndexError);
  EXPECT_THROW(site_probability(spec, 1, 11, 1.0), IndexError);
  EXPECT_THROW(amplitude_derivative(spec, 1, 0, 1.0), IndexError);
}

TEST(SiteProbability, examples) {
  const ChainSpec ten(10);
  EXPECT_NEAR(site_probability(ten, 4, 4, 0.0), 1.0, 1e-14);
  const ChainSpec two(2);
  for (double lambda : {0.1, 1.0, 3.0, 6.0}) {
    EXPECT_NEAR(site_probability(two, 1, 2, lambda), std::pow(std::sin(lambda / 2), 2), 1e-14);
  }
}

TEST(SiteProbability, mirror_symmetry) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam(0.0, 20.0);
  for (int s : {3, 10, 12}) {
    const ChainSpec spec(s);
    for (int trial = 0; trial < 40; ++trial) {
      const int x0 = 1 + static_cast<int>(rng() % s);
      const int m = 1 + static_cast<int>(rng() % s);
      const double lambda = lam(rng);
      EXPECT_NEAR(site_probability(spec, x0, m, lambda),
                  site_probability(spec, spec.mirror(x0), spec.mirror(m), lambda), 1e-12);
    }
  }
}

TEST(AmplitudeDerivative, first_order_expansion_at_zero) {
  const ChainSpec spec(10);
  for (int x0 : {1, 4, 10}) {
    for (int m = 1; m <= 10; ++m) {
      const Complex expected = std::abs(m - x0) == 1 ? Complex(0.0, 0.5) : Complex(0.0);
      EXPECT_NEAR(std::abs(amplitude_derivative(spec, x0, m, 0.0) - expected), 0.0, 1e-14);
    }
  }
}

TEST(AmplitudeDerivative, two_site_closed_form) {
  const ChainSpec spec(2);
  for (double lambda : {0.2, 1.3, 4.0}) {
    EXPECT_NEAR(std::abs(amplitude_derivative(spec, 1, 1, lambda) - Complex(-0.5 * std::sin(lambda / 2))),
                0.0, 1e-14);
  }
}

TEST(AmplitudeDerivative, matches_central_differences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.0, 12.0);
  for (int s : {2, 5, 10}) {
    const ChainSpec spec(s);
    for (int trial = 0; trial < 30; ++trial) {
      const int x0 = 1 + static_cast<int>(rng() % s);
      const int m = 1 + static_cast<int>(rng() % s);
      const double lambda = lam(rng);
      EXPECT_LT(std::abs(amplitude_derivative(spec, x0, m, lambda) -
                         finite_difference(spec, x0, m, lambda)),
                1e-8);
    }
  }
}

TEST(Propagator, second_derivative_matches_differences_of_first) {
  const ChainSpec spec(8);
  const Propagator prop(spec);
  const double h = 1e-5;
  for (double lambda : {0.0, 0.9, 3.3}) {
    const VectorXcd d2 = prop.amplitudes(3, lambda, 2);
    const VectorXcd fd = (prop.amplitudes(3, lambda + h, 1) - prop.amplitudes(3, lambda - h, 1)) / (2 * h);
    EXPECT_LT((d2 - fd).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Propagator, apply_agrees_with_amplitudes) {
  const ChainSpec spec(9);
  const Propagator prop(spec);
  const VectorXcd start = WaveVector::localized(spec, 4).amplitudes;
  EXPECT_LT((prop.apply(start, 2.7) - prop.amplitudes(4, 2.7)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((prop.apply(start, 2.7, 1) - prop.amplitudes(4, 2.7, 1)).cwiseAbs().maxCoeff(), 1e-14);
}
