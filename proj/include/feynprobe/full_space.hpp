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

// Brute-force reference dynamics on the full 2^s spin Hilbert space.
//
// Used only for verification. Nothing here touches the closed-form spectrum:
// the Hamiltonian is assembled from raising/lowering operators and
// exponentiated with a dense eigendecomposition.

#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "feynprobe/chain.hpp"

namespace feynprobe {

inline constexpr int kMaxOracleSites = 12;

namespace detail {

// Site j (1-indexed) is bit j-1; a set bit is a spin up.
inline std::uint32_t site_bit(int site) { return std::uint32_t{1} << (site - 1); }

inline void check_oracle_size(const ChainSpec& spec) {
  if (spec.sites() > kMaxOracleSites) {
    throw OracleSizeError("full-space oracle limited to " + std::to_string(kMaxOracleSites) +
                          " sites, got " + std::to_string(spec.sites()));
  }
}

}  // namespace detail

/// H0 / nu = -1/2 sum_j (s+^{j+1} s-^j + s+^j s-^{j+1}) on the 2^s space.
inline MatrixXd full_space_hamiltonian(const ChainSpec& spec) {
  detail::check_oracle_size(spec);
  const int s = spec.sites();
  const Eigen::Index dim = Eigen::Index{1} << s;
  MatrixXd h = MatrixXd::Zero(dim, dim);
  for (Eigen::Index state = 0; state < dim; ++state) {
    const auto bits = static_cast<std::uint32_t>(state);
    for (int j = 1; j < s; ++j) {
      const std::uint32_t lo = detail::site_bit(j);
      const std::uint32_t hi = detail::site_bit(j + 1);
      // s+^{j+1} s-^j: needs j up, j+1 down.
      if ((bits & lo) && !(bits & hi)) {
        h(static_cast<Eigen::Index>(bits ^ lo ^ hi), state) += -0.5;
      }
      // s+^j s-^{j+1}: needs j+1 up, j down.
      if ((bits & hi) && !(bits & lo)) {
        h(static_cast<Eigen::Index>(bits ^ lo ^ hi), state) += -0.5;
      }
    }
  }
  return h;
}

/// Diagonal of N_z = number of up spins.
inline Eigen::VectorXd number_operator_diagonal(const ChainSpec& spec) {
  detail::check_oracle_size(spec);
  const Eigen::Index dim = Eigen::Index{1} << spec.sites();
  Eigen::VectorXd n(dim);
  for (Eigen::Index state = 0; state < dim; ++state) {
    n(state) = std::popcount(static_cast<std::uint32_t>(state));
  }
  return n;
}

/// Dense unitary evolution of the full spin chain.
class FullSpaceEvolver {
 public:
  explicit FullSpaceEvolver(const ChainSpec& spec) : spec_(spec) {
    solver_.compute(full_space_hamiltonian(spec));
  }

  const ChainSpec& spec() const { return spec_; }

  /// exp(-i lambda H) applied to a full-space state.
  VectorXcd evolve(const VectorXcd& state, double lambda) const {
    const auto& vecs = solver_.eigenvectors();
    const auto& vals = solver_.eigenvalues();
    VectorXcd coeffs = vecs.transpose().cast<Complex>() * state;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
      coeffs(k) *= std::polar(1.0, -lambda * vals(k));
    }
    return vecs.cast<Complex>() * coeffs;
  }

  /// Basis state with a single up spin at `site`.
  VectorXcd single_excitation(int site) const {
    spec_.check_site(site, "x0");
    VectorXcd state = VectorXcd::Zero(Eigen::Index{1} << spec_.sites());
    state(detail::site_bit(site)) = 1.0;
    return state;
  }

  /// Components of a full-space state on the single-excitation sector.
  WaveVector project_single_excitation(const VectorXcd& state) const {
    WaveVector out{VectorXcd::Zero(spec_.sites())};
    for (int j = 1; j <= spec_.sites(); ++j) {
      out.amplitudes(j - 1) = state(detail::site_bit(j));
    }
    return out;
  }

 private:
  ChainSpec spec_;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver_;
};

/// Reference single-excitation evolution from the full 2^s Hamiltonian.
inline WaveVector full_space_oracle(const ChainSpec& spec, int x0, double lambda) {
  detail::check_oracle_size(spec);
  spec.check_site(x0, "x0");
  FullSpaceEvolver evolver(spec);
  return evolver.project_single_excitation(evolver.evolve(evolver.single_excitation(x0), lambda));
}

}  // namespace feynprobe
