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

// Feynman probe: a single register qubit entangled with the chain through a
// sigma_x gate between sites m and m+1.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "feynprobe/chain.hpp"

namespace feynprobe {

enum class Spin { Up, Down };

/// Plugging site m (1 <= m <= s-1) and initial excitation site x0 <= m.
/// The register always starts in |up>.
struct ProbeConfig {
  int m = 1;
  int x0 = 1;

  void validate(const ChainSpec& spec) const {
    if (m < 1 || m > spec.sites() - 1) {
      throw ConfigError("probe site m = " + std::to_string(m) + " outside 1.." +
                        std::to_string(spec.sites() - 1));
    }
    spec.check_site(x0, "x0");
    if (x0 > m) {
      throw ConfigError("excitation starts right of the probe gate (x0 = " + std::to_string(x0) +
                        " > m = " + std::to_string(m) + ")");
    }
  }
};

struct PeresLabel {
  int site;
  Spin spin;

  friend bool operator==(const PeresLabel&, const PeresLabel&) = default;
};

/// Ordered computational basis |1,up>, ..., |m,up>, |m+1,down>, ..., |s,down>.
struct PeresBasis {
  std::vector<PeresLabel> labels;

  int count(Spin spin) const {
    int n = 0;
    for (const auto& l : labels) n += l.spin == spin ? 1 : 0;
    return n;
  }
};

inline PeresBasis peres_basis(const ChainSpec& spec, const ProbeConfig& config) {
  config.validate(spec);
  PeresBasis basis;
  basis.labels.reserve(spec.sites());
  for (int j = 1; j <= spec.sites(); ++j) {
    basis.labels.push_back({j, j <= config.m ? Spin::Up : Spin::Down});
  }
  return basis;
}

/// State of clock (chain) x register, 2s amplitudes ordered site-major:
/// index 2(j-1) + {0: up, 1: down}.
struct JointWaveVector {
  VectorXcd amplitudes;

  static Eigen::Index index(int site, Spin spin) {
    return 2 * static_cast<Eigen::Index>(site - 1) + (spin == Spin::Down ? 1 : 0);
  }

  Complex at(int site, Spin spin) const { return amplitudes(index(site, spin)); }

  double norm_squared() const { return amplitudes.squaredNorm(); }

  double register_population(Spin spin) const {
    double total = 0.0;
    for (int j = 1; j <= static_cast<int>(amplitudes.size() / 2); ++j) total += std::norm(at(j, spin));
    return total;
  }

  /// Squared norm outside span(basis).
  double leakage(const PeresBasis& basis) const {
    double inside = 0.0;
    for (const auto& l : basis.labels) inside += std::norm(at(l.site, l.spin));
    return std::max(0.0, norm_squared() - inside);
  }
};

namespace detail {

// Sums over the excitation amplitudes left of (and including) the gate.
inline double up_sum(const VectorXcd& a, int m) {
  double p = 0.0;
  for (int x = 0; x < m; ++x) p += std::norm(a(x));
  return p;
}

inline double down_sum(const VectorXcd& a, int m) {
  double q = 0.0;
  for (int x = m; x < a.size(); ++x) q += std::norm(a(x));
  return q;
}

}  // namespace detail

/// P(up | m, x0, lambda) = sum_{x <= m} |<x|psi_lambda>|^2.
inline double probe_up_probability(const ChainSpec& spec, const ProbeConfig& config, double lambda) {
  config.validate(spec);
  return detail::up_sum(Propagator(spec).amplitudes(config.x0, lambda), config.m);
}

/// d/dlambda P(up | m, x0, lambda) = sum_{x <= m} 2 Re(conj(A_x) dA_x).
inline double probe_probability_derivative(const ChainSpec& spec, const ProbeConfig& config,
                                           double lambda) {
  config.validate(spec);
  const Propagator prop(spec);
  const VectorXcd a = prop.amplitudes(config.x0, lambda);
  const VectorXcd da = prop.amplitudes(config.x0, lambda, 1);
  double dp = 0.0;
  for (int x = 0; x < config.m; ++x) dp += 2.0 * std::real(std::conj(a(x)) * da(x));
  return dp;
}

/// Feynman Hamiltonian H_F / nu on the 2s-dimensional clock x register space:
///   -1/2 sum_j |j+1><j| (x) U_j + |j><j+1| (x) U_j^dagger.
/// `gates` holds U_1 .. U_{s-1}.
inline Eigen::MatrixXcd feynman_hamiltonian(const ChainSpec& spec,
                                            std::span<const Eigen::Matrix2cd> gates) {
  const int s = spec.sites();
  if (static_cast<int>(gates.size()) != s - 1) {
    throw ConfigError("Feynman machine needs s-1 = " + std::to_string(s - 1) + " gates, got " +
                      std::to_string(gates.size()));
  }
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * s, 2 * s);
  for (int j = 1; j < s; ++j) {
    const Eigen::Matrix2cd& u = gates[j - 1];
    const Eigen::Index from = 2 * (j - 1);
    const Eigen::Index to = 2 * j;
    h.block<2, 2>(to, from) += -0.5 * u;
    h.block<2, 2>(from, to) += -0.5 * u.adjoint();
  }
  return h;
}

/// Gate list with sigma_x at position m and the identity elsewhere.
inline std::vector<Eigen::Matrix2cd> single_probe_gates(const ChainSpec& spec, int m) {
  std::vector<Eigen::Matrix2cd> gates(spec.sites() - 1, Eigen::Matrix2cd::Identity());
  Eigen::Matrix2cd sigma_x;
  sigma_x << 0.0, 1.0, 1.0, 0.0;
  gates[m - 1] = sigma_x;
  return gates;
}

/// Reference dynamics of the full Feynman machine by dense exponentiation.
inline JointWaveVector joint_evolve_oracle(const ChainSpec& spec, const ProbeConfig& config,
                                           double lambda) {
  config.validate(spec);
  if (spec.sites() > 64) throw OracleSizeError("joint oracle limited to 64 sites");
  const auto gates = single_probe_gates(spec, config.m);
  const Eigen::MatrixXcd h = feynman_hamiltonian(spec, gates);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  VectorXcd start = VectorXcd::Zero(2 * spec.sites());
  start(JointWaveVector::index(config.x0, Spin::Up)) = 1.0;
  VectorXcd coeffs = solver.eigenvectors().adjoint() * start;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    coeffs(k) *= std::polar(1.0, -lambda * solver.eigenvalues()(k));
  }
  return JointWaveVector{solver.eigenvectors() * coeffs};
}

}  // namespace feynprobe
