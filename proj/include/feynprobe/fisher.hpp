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

// Fisher information for the chain-coupling estimation problem: the quantum
// Fisher information, the SLD optimal measurement, and the classical Fisher
// information of local and probe measurements.

#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "feynprobe/chain.hpp"
#include "feynprobe/probe.hpp"

namespace feynprobe {

/// Below this value of p(1-p) the Fisher ratio is replaced by its limit.
inline constexpr double kFisherSingularity = 1e-12;

/// Fisher information of a Bernoulli outcome with success probability p,
/// complement q = 1 - p (passed separately so it can be computed without
/// cancellation), and derivatives dp, d2p.
///
/// At probability extrema both (dp)^2 and p q vanish quadratically; there the
/// ratio is evaluated through one L'Hopital step, 2 d2p / (1 - 2p).
/// Returns NaN when even that is undefined.
inline double bernoulli_fisher(double p, double q, double dp, double d2p) {
  const double denom = p * q;
  if (denom >= kFisherSingularity) return dp * dp / denom;
  const double limit = 2.0 * d2p / (q - p);
  if (!std::isfinite(limit)) return std::numeric_limits<double>::quiet_NaN();
  // Round-off can leave a tiny negative limit where the true value is zero.
  if (limit < 0.0) return limit > -1e-10 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return limit + 0.0;  // no signed zero
}

/// H = 4 (<G^2> - <G>^2) on |x0>; independent of lambda.
inline double qfi(const ChainSpec& spec, int x0) {
  const WaveVector psi0 = WaveVector::localized(spec, x0);
  const MatrixXd g = generator_matrix(spec);
  const VectorXcd gpsi = g.cast<Complex>() * psi0.amplitudes;
  const double mean = std::real(psi0.amplitudes.dot(gpsi));
  const double second = gpsi.squaredNorm();
  return 4.0 * (second - mean * mean);
}

inline double cr_bound(double fisher, double trials) {
  if (!(fisher > 0.0)) throw DomainError("Cramer-Rao bound needs positive Fisher information");
  if (!(trials >= 1.0)) throw DomainError("Cramer-Rao bound needs at least one trial");
  return 1.0 / (trials * fisher);
}

inline double qcr_bound(double quantum_fisher, double trials) {
  if (!(quantum_fisher > 0.0)) {
    throw DomainError("quantum Cramer-Rao bound needs positive quantum Fisher information");
  }
  if (!(trials >= 1.0)) throw DomainError("quantum Cramer-Rao bound needs at least one trial");
  return 1.0 / (trials * quantum_fisher);
}

/// Extremal (x0 at either end) or interior initial site.
enum class SldFamily { Extremal, Interior };

/// Spectral decomposition of the SLD L = 2(|psi><dpsi| + |dpsi><psi|).
///
/// eigenvalues[0] < 0 < eigenvalues[1]; the remaining s-2 span the kernel.
/// eigenvectors[i] belongs to eigenvalues[i].
struct SldSystem {
  std::vector<double> eigenvalues;
  std::vector<WaveVector> eigenvectors;
  SldFamily family;
};

/// The SLD as a dense s x s matrix, built directly from |psi> and |dpsi>.
inline Eigen::MatrixXcd sld_matrix(const ChainSpec& spec, int x0, double lambda) {
  const Propagator prop(spec);
  const VectorXcd psi = prop.amplitudes(x0, lambda);
  const VectorXcd dpsi = prop.amplitudes(x0, lambda, 1);
  return 2.0 * (psi * dpsi.adjoint() + dpsi * psi.adjoint());
}

namespace detail {

// Orthonormal completion of two orthonormal vectors by Gram-Schmidt over the
// site basis.
inline std::vector<VectorXcd> orthonormal_complement(const VectorXcd& a, const VectorXcd& b) {
  const Eigen::Index s = a.size();
  std::vector<VectorXcd> basis{a, b};
  for (Eigen::Index j = 0; j < s && static_cast<Eigen::Index>(basis.size()) < s; ++j) {
    VectorXcd v = VectorXcd::Unit(s, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) v -= u.dot(v) * u;
    }
    const double n = v.norm();
    if (n > 1e-8) basis.push_back(v / n);
  }
  return {basis.begin() + 2, basis.end()};
}

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

}  // namespace detail

/// Eigensystem of the SLD at lambda. The eigenvectors are built at lambda = 0
/// from |psi0> and the normalized component chi of |dpsi0> orthogonal to it,
/// (|psi0> -/+ |chi>)/sqrt(2), then carried to lambda by U_lambda.
inline SldSystem sld_eigensystem(const ChainSpec& spec, int x0, double lambda) {
  spec.check_site(x0, "x0");
  const Propagator prop(spec);
  const VectorXcd psi0 = WaveVector::localized(spec, x0).amplitudes;
  const VectorXcd dpsi0 = prop.amplitudes(x0, 0.0, 1);
  const Complex overlap = psi0.dot(dpsi0);
  const VectorXcd orth = dpsi0 - overlap * psi0;
  const double b = orth.norm();
  const VectorXcd chi = orth / b;

  std::vector<VectorXcd> at_origin;
  at_origin.push_back((psi0 - chi) / std::sqrt(2.0));
  at_origin.push_back((psi0 + chi) / std::sqrt(2.0));
  for (auto& v : detail::orthonormal_complement(psi0, chi)) at_origin.push_back(std::move(v));

  SldSystem sys;
  sys.family = spec.is_extremal(x0) ? SldFamily::Extremal : SldFamily::Interior;
  sys.eigenvalues.assign(spec.sites(), 0.0);
  sys.eigenvalues[0] = -2.0 * b;
  sys.eigenvalues[1] = 2.0 * b;
  for (const auto& v : at_origin) sys.eigenvectors.push_back(WaveVector{prop.apply(v, lambda)});
  return sys;
}

/// Classical Fisher information of the projective measurement on the SLD
/// eigenbasis at lambda. Kernel outcomes are orthogonal to both |psi> and
/// |dpsi>, so their contribution vanishes in the limit and is skipped.
inline double sld_measurement_fisher(const ChainSpec& spec, int x0, double lambda) {
  const SldSystem sys = sld_eigensystem(spec, x0, lambda);
  const Propagator prop(spec);
  const VectorXcd psi = prop.amplitudes(x0, lambda);
  const VectorXcd dpsi = prop.amplitudes(x0, lambda, 1);
  double fisher = 0.0;
  for (const auto& v : sys.eigenvectors) {
    const Complex amp = v.amplitudes.dot(psi);
    const Complex damp = v.amplitudes.dot(dpsi);
    const double p = std::norm(amp);
    if (p < kFisherSingularity) continue;
    const double dp = 2.0 * std::real(std::conj(amp) * damp);
    fisher += dp * dp / p;
  }
  return fisher;
}

/// A two-outcome measurement on the evolved chain and its success
/// probability as a function of lambda.
class MeasurementModel {
 public:
  /// Presence test for the excitation at site m.
  struct Local {
    int m;
    int x0;
  };
  /// sigma_z readout of a Feynman probe plugged at site m; success = up.
  struct Probe {
    int m;
    int x0;
  };
  /// Projection onto the positive-eigenvalue SLD eigenvector at lambda_ref.
  struct SldOptimal {
    int x0;
    double lambda_ref;
  };
  using Kind = std::variant<Local, Probe, SldOptimal>;

  static MeasurementModel local(const ChainSpec& spec, int m, int x0) {
    spec.check_site(m, "m");
    spec.check_site(x0, "x0");
    return MeasurementModel(spec, Local{m, x0});
  }

  static MeasurementModel probe(const ChainSpec& spec, int m, int x0) {
    ProbeConfig{m, x0}.validate(spec);
    return MeasurementModel(spec, Probe{m, x0});
  }

  static MeasurementModel sld_optimal(const ChainSpec& spec, int x0, double lambda_ref) {
    spec.check_site(x0, "x0");
    MeasurementModel model(spec, SldOptimal{x0, lambda_ref});
    model.sld_vector_ = sld_eigensystem(spec, x0, lambda_ref).eigenvectors[1].amplitudes;
    return model;
  }

  const ChainSpec& spec() const { return prop_->spec(); }
  const Kind& kind() const { return kind_; }

  int x0() const {
    return std::visit([](const auto& k) { return k.x0; }, kind_);
  }

  /// "LM", "FP" or "SLD".
  std::string tag() const {
    return std::visit(detail::Overload{[](const Local&) { return std::string("LM"); },
                               [](const Probe&) { return std::string("FP"); },
                               [](const SldOptimal&) { return std::string("SLD"); }},
                      kind_);
  }

  std::string describe() const {
    return std::visit(
        detail::Overload{[&](const Local& k) {
                   return "LM(s=" + std::to_string(spec().sites()) + ",m=" + std::to_string(k.m) +
                          ",x0=" + std::to_string(k.x0) + ")";
                 },
                 [&](const Probe& k) {
                   return "FP(s=" + std::to_string(spec().sites()) + ",m=" + std::to_string(k.m) +
                          ",x0=" + std::to_string(k.x0) + ")";
                 },
                 [&](const SldOptimal& k) {
                   return "SLD(s=" + std::to_string(spec().sites()) + ",x0=" + std::to_string(k.x0) +
                          ",lambda_ref=" + std::to_string(k.lambda_ref) + ")";
                 }},
        kind_);
  }

  /// Success probability together with its complement and first two
  /// lambda-derivatives.
  struct Evaluation {
    double p;
    double q;
    double dp;
    double d2p;
  };

  Evaluation evaluate(double lambda) const {
    const int x0 = this->x0();
    const VectorXcd a = prop_->amplitudes(x0, lambda);
    const VectorXcd da = prop_->amplitudes(x0, lambda, 1);
    const VectorXcd d2a = prop_->amplitudes(x0, lambda, 2);
    // p = sum over the success set of |A|^2; differentiate term by term.
    const auto accumulate = [&](Eigen::Index lo, Eigen::Index hi) {
      Evaluation e{0.0, 0.0, 0.0, 0.0};
      for (Eigen::Index x = lo; x < hi; ++x) {
        e.p += std::norm(a(x));
        e.dp += 2.0 * std::real(std::conj(a(x)) * da(x));
        e.d2p += 2.0 * std::norm(da(x)) + 2.0 * std::real(std::conj(a(x)) * d2a(x));
      }
      return e;
    };
    const Eigen::Index s = a.size();
    return std::visit(
        detail::Overload{[&](const Local& k) {
                   Evaluation e = accumulate(k.m - 1, k.m);
                   e.q = a.head(k.m - 1).squaredNorm() + a.tail(s - k.m).squaredNorm();
                   return e;
                 },
                 [&](const Probe& k) {
                   Evaluation e = accumulate(0, k.m);
                   e.q = a.tail(s - k.m).squaredNorm();
                   return e;
                 },
                 [&](const SldOptimal&) {
                   const Complex amp = sld_vector_.dot(a);
                   const Complex damp = sld_vector_.dot(da);
                   const Complex d2amp = sld_vector_.dot(d2a);
                   Evaluation e;
                   e.p = std::norm(amp);
                   e.q = 1.0 - e.p;
                   e.dp = 2.0 * std::real(std::conj(amp) * damp);
                   e.d2p = 2.0 * std::norm(damp) + 2.0 * std::real(std::conj(amp) * d2amp);
                   return e;
                 }},
        kind_);
  }

  double probability(double lambda) const { return evaluate(lambda).p; }
  double derivative(double lambda) const { return evaluate(lambda).dp; }

  double fisher(double lambda) const {
    const Evaluation e = evaluate(lambda);
    return bernoulli_fisher(e.p, e.q, e.dp, e.d2p);
  }

 private:
  MeasurementModel(const ChainSpec& spec, Kind kind)
      : prop_(std::make_shared<const Propagator>(spec)), kind_(kind) {}

  std::shared_ptr<const Propagator> prop_;
  Kind kind_;
  VectorXcd sld_vector_;
};

/// F^L_m(lambda; x0) for the presence test at site m.
inline double fisher_local(const ChainSpec& spec, int x0, int m, double lambda) {
  return MeasurementModel::local(spec, m, x0).fisher(lambda);
}

/// F^P_m(lambda; x0) for the Feynman probe plugged at site m.
inline double fisher_probe(const ChainSpec& spec, int x0, int m, double lambda) {
  return MeasurementModel::probe(spec, m, x0).fisher(lambda);
}

}  // namespace feynprobe
