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

// Single-excitation dynamics of the uniform XX chain.
//
// Every quantity is expressed through the dimensionless coupling
// lambda = nu * tau; the bare coupling and the interaction time never enter.
// Sites are 1-indexed at every public boundary.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "feynprobe/error.hpp"

namespace feynprobe {

using Complex = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

/// Chain geometry: the number of sites s >= 2.
class ChainSpec {
 public:
  static constexpr int kDefaultSites = 10;

  explicit ChainSpec(int sites = kDefaultSites) : sites_(sites) {
    if (sites < 2) {
      throw InvalidSpec("chain needs at least 2 sites, got " + std::to_string(sites));
    }
  }

  int sites() const { return sites_; }

  bool contains(int site) const { return site >= 1 && site <= sites_; }

  void check_site(int site, const char* what) const {
    if (!contains(site)) {
      throw IndexError(std::string(what) + " = " + std::to_string(site) + " outside 1.." +
                       std::to_string(sites_));
    }
  }

  /// Site obtained by reflecting the chain about its centre.
  int mirror(int site) const { return sites_ + 1 - site; }

  bool is_extremal(int site) const { return site == 1 || site == sites_; }

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;

 private:
  int sites_;
};

/// Closed-form eigensystem of the generator G = H0 / nu.
///
/// energies[k-1] = g_k = -cos(k pi / (s+1)) and modes(j-1, k-1) = phi_k(j).
struct SpectralBasis {
  std::vector<double> energies;
  MatrixXd modes;

  int size() const { return static_cast<int>(energies.size()); }
};

inline SpectralBasis build_spectral_basis(const ChainSpec& spec) {
  const int s = spec.sites();
  const double denom = static_cast<double>(s + 1);
  const double norm = std::sqrt(2.0 / denom);
  SpectralBasis basis;
  basis.energies.resize(s);
  basis.modes.resize(s, s);
  for (int k = 1; k <= s; ++k) {
    basis.energies[k - 1] = -std::cos(k * std::numbers::pi / denom);
    for (int j = 1; j <= s; ++j) {
      basis.modes(j - 1, k - 1) = norm * std::sin(k * std::numbers::pi * j / denom);
    }
  }
  return basis;
}

/// Symmetric tridiagonal generator with -1/2 on the off-diagonals.
using GeneratorMatrix = MatrixXd;

inline GeneratorMatrix generator_matrix(const ChainSpec& spec) {
  const int s = spec.sites();
  GeneratorMatrix g = GeneratorMatrix::Zero(s, s);
  for (int j = 0; j + 1 < s; ++j) {
    g(j, j + 1) = -0.5;
    g(j + 1, j) = -0.5;
  }
  return g;
}

enum class Basis { Site };

/// Chain state over the site basis {|1>, ..., |s>}.
struct WaveVector {
  VectorXcd amplitudes;
  Basis basis = Basis::Site;

  int size() const { return static_cast<int>(amplitudes.size()); }

  /// Amplitude <site|psi>, 1-indexed.
  Complex at(int site) const { return amplitudes(site - 1); }

  double norm_squared() const { return amplitudes.squaredNorm(); }

  static WaveVector localized(const ChainSpec& spec, int site) {
    spec.check_site(site, "site");
    WaveVector v{VectorXcd::Zero(spec.sites())};
    v.amplitudes(site - 1) = 1.0;
    return v;
  }
};

/// Evaluates U_lambda = exp(-i lambda G) and its lambda-derivatives through
/// the spectral sum. Construct once per chain and reuse across a scan.
class Propagator {
 public:
  explicit Propagator(const ChainSpec& spec) : spec_(spec), basis_(build_spectral_basis(spec)) {}

  const ChainSpec& spec() const { return spec_; }
  const SpectralBasis& basis() const { return basis_; }

  /// order-th lambda-derivative of <m|U_lambda|x0> for every m:
  ///   sum_k (-i g_k)^order exp(-i lambda g_k) phi_k(m) phi_k(x0).
  VectorXcd amplitudes(int x0, double lambda, int order = 0) const {
    spec_.check_site(x0, "x0");
    const int s = spec_.sites();
    VectorXcd weights(s);
    for (int k = 0; k < s; ++k) {
      const double g = basis_.energies[k];
      weights(k) = spectral_factor(g, lambda, order) * basis_.modes(x0 - 1, k);
    }
    return basis_.modes.cast<Complex>() * weights;
  }

  /// order-th lambda-derivative of U_lambda applied to an arbitrary vector.
  VectorXcd apply(const VectorXcd& v, double lambda, int order = 0) const {
    const int s = spec_.sites();
    VectorXcd coeffs = basis_.modes.transpose().cast<Complex>() * v;
    for (int k = 0; k < s; ++k) {
      coeffs(k) *= spectral_factor(basis_.energies[k], lambda, order);
    }
    return basis_.modes.cast<Complex>() * coeffs;
  }

  WaveVector evolve(int x0, double lambda) const { return WaveVector{amplitudes(x0, lambda)}; }

 private:
  static Complex spectral_factor(double g, double lambda, int order) {
    const Complex phase = std::polar(1.0, -lambda * g);
    switch (order) {
      case 0:
        return phase;
      case 1:
        return Complex(0.0, -g) * phase;
      case 2:
        return -g * g * phase;
      default:
        return std::pow(Complex(0.0, -g), order) * phase;
    }
  }

  ChainSpec spec_;
  SpectralBasis basis_;
};

/// |psi_lambda> = exp(-i lambda G)|x0>.
inline WaveVector evolve(const ChainSpec& spec, int x0, double lambda) {
  return Propagator(spec).evolve(x0, lambda);
}

/// P(m | x0, lambda) = |<m|psi_lambda>|^2.
inline double site_probability(const ChainSpec& spec, int x0, int m, double lambda) {
  spec.check_site(m, "m");
  return std::norm(evolve(spec, x0, lambda).at(m));
}

/// d/dlambda <m|psi_lambda>, analytic.
inline Complex amplitude_derivative(const ChainSpec& spec, int x0, int m, double lambda) {
  spec.check_site(m, "m");
  return Propagator(spec).amplitudes(x0, lambda, 1)(m - 1);
}

}  // namespace feynprobe
