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

// Grid-based Bayesian estimation of lambda from simulated Bernoulli data.
//
// Posteriors live on a uniform lambda grid; every integral is a trapezoidal
// quadrature on that grid. Likelihoods are accumulated in log space and
// shifted by their maximum before exponentiation, so campaigns with millions
// of trials stay finite.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "feynprobe/error.hpp"
#include "feynprobe/fisher.hpp"
#include "feynprobe/random.hpp"

namespace feynprobe {

/// Uniform lambda axis, nodes lo + i * spacing for i in [0, points).
struct LambdaGrid {
  double lo = 0.0;
  double hi = 6.0;
  std::size_t points = 4096;

  void validate() const {
    if (!(lo >= 0.0)) throw DomainError("lambda grid must start at a nonnegative value");
    if (!(lo < hi)) throw DomainError("lambda grid needs lo < hi");
    if (points < 2) throw DomainError("lambda grid needs at least 2 points");
  }

  double spacing() const { return (hi - lo) / static_cast<double>(points - 1); }

  double node(std::size_t i) const {
    return i + 1 == points ? hi : lo + static_cast<double>(i) * spacing();
  }

  bool contains(double lambda) const { return lambda >= lo && lambda <= hi; }

  friend bool operator==(const LambdaGrid&, const LambdaGrid&) = default;
};

/// Trapezoidal integral of f sampled on the grid nodes.
inline double trapezoid(const LambdaGrid& grid, const std::vector<double>& f) {
  double sum = 0.0;
  for (double v : f) sum += v;
  sum -= 0.5 * (f.front() + f.back());
  return sum * grid.spacing();
}

/// One simulated campaign: `successes` out of `trials` Bernoulli outcomes.
struct BernoulliDataset {
  MeasurementModel model;
  double lambda_true = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t seed = 0;
};

/// Draws the success count from Binomial(trials, p(lambda_true)) on the
/// counter stream keyed by `seed`.
inline BernoulliDataset simulate_dataset(const MeasurementModel& model, double lambda_true,
                                         std::uint64_t trials, std::uint64_t seed,
                                         const LambdaGrid& grid = {}) {
  if (!grid.contains(lambda_true)) {
    throw DomainError("true lambda " + std::to_string(lambda_true) + " outside grid support");
  }
  const auto e = model.evaluate(lambda_true);
  // Spectral sums leave ~1e-16 residue where p is exactly 0 or 1.
  double p = e.p;
  if (p < 1e-14) p = 0.0;
  if (e.q < 1e-14) p = 1.0;
  const std::uint64_t successes = binomial_draw(CounterStream(seed), trials, p);
  return BernoulliDataset{model, lambda_true, trials, successes, seed};
}

/// log p and log(1-p) of a model on every grid node.
struct ProbabilityTable {
  LambdaGrid grid;
  std::vector<double> log_p;
  std::vector<double> log_q;
};

inline ProbabilityTable tabulate(const MeasurementModel& model, const LambdaGrid& grid) {
  grid.validate();
  ProbabilityTable t{grid, std::vector<double>(grid.points), std::vector<double>(grid.points)};
  for (std::size_t i = 0; i < grid.points; ++i) {
    const auto e = model.evaluate(grid.node(i));
    t.log_p[i] = e.p > 0.0 ? std::log(e.p) : -std::numeric_limits<double>::infinity();
    t.log_q[i] = e.q > 0.0 ? std::log(e.q) : -std::numeric_limits<double>::infinity();
  }
  return t;
}

/// N0 ln p + (M - N0) ln(1 - p) per node; 0 * ln 0 counts as 0.
inline std::vector<double> log_likelihood(const ProbabilityTable& table, std::uint64_t trials,
                                          std::uint64_t successes) {
  if (successes > trials) throw DomainError("more successes than trials");
  const double n0 = static_cast<double>(successes);
  const double n1 = static_cast<double>(trials - successes);
  std::vector<double> out(table.grid.points, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (successes > 0) out[i] += n0 * table.log_p[i];
    if (trials > successes) out[i] += n1 * table.log_q[i];
  }
  return out;
}

inline std::vector<double> log_likelihood(const LambdaGrid& grid, const BernoulliDataset& data) {
  return log_likelihood(tabulate(data.model, grid), data.trials, data.successes);
}

/// Normalized density on a grid.
struct PosteriorGrid {
  LambdaGrid grid;
  std::vector<double> weights;

  static PosteriorGrid flat(const LambdaGrid& grid) {
    grid.validate();
    return PosteriorGrid{grid, std::vector<double>(grid.points, 1.0 / (grid.hi - grid.lo))};
  }

  double integral() const { return trapezoid(grid, weights); }
};

/// prior x exp(log_like), renormalized.
inline PosteriorGrid bayes_update(const PosteriorGrid& prior, const std::vector<double>& log_like) {
  if (log_like.size() != prior.weights.size()) throw DomainError("likelihood/prior size mismatch");
  std::vector<double> log_post(log_like.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_post.size(); ++i) {
    const double w = prior.weights[i];
    log_post[i] = w > 0.0 ? std::log(w) + log_like[i] : -std::numeric_limits<double>::infinity();
    shift = std::max(shift, log_post[i]);
  }
  if (!std::isfinite(shift)) {
    throw DegeneratePosterior("data impossible under every grid value of lambda");
  }
  PosteriorGrid post{prior.grid, std::vector<double>(log_post.size())};
  for (std::size_t i = 0; i < log_post.size(); ++i) post.weights[i] = std::exp(log_post[i] - shift);
  const double z = post.integral();
  if (!(z > 0.0)) throw DegeneratePosterior("posterior integrates to zero");
  for (double& w : post.weights) w /= z;
  return post;
}

inline PosteriorGrid posterior(const LambdaGrid& grid, const PosteriorGrid& prior,
                               const BernoulliDataset& data) {
  if (!(prior.grid == grid)) throw DomainError("prior lives on a different grid");
  return bayes_update(prior, log_likelihood(grid, data));
}

struct PointEstimate {
  double mean;
  double variance;
};

/// Posterior mean and variance.
inline PointEstimate point_estimate(const PosteriorGrid& post) {
  const std::size_t n = post.weights.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = post.grid.node(i) * post.weights[i];
  const double mean = trapezoid(post.grid, f);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = post.grid.node(i) - mean;
    f[i] = d * d * post.weights[i];
  }
  return {mean, std::max(0.0, trapezoid(post.grid, f))};
}

struct Peak {
  double location;
  double height;
};

/// Interior local maxima above `min_relative_height` of the global maximum,
/// sorted by height (highest first). A plateau counts once, at its centre,
/// and only if both neighbours are strictly lower; a fully flat posterior
/// therefore has no peaks. Isolated maxima are refined with a parabola
/// through the three nodes around them.
inline std::vector<Peak> peak_analysis(const PosteriorGrid& post, double min_relative_height = 0.05) {
  const auto& w = post.weights;
  const std::size_t n = w.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  const double global = *std::max_element(w.begin(), w.end());
  if (!(global > 0.0)) return peaks;
  const double h = post.grid.spacing();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && w[j + 1] == w[i]) ++j;
    const bool interior = i > 0 && j + 1 < n;
    if (interior && w[i - 1] < w[i] && w[j + 1] < w[j] && w[i] >= min_relative_height * global) {
      if (i == j) {
        const double left = w[i - 1], mid = w[i], right = w[i + 1];
        const double curvature = left - 2.0 * mid + right;
        const double offset = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;
        peaks.push_back({post.grid.node(i) + offset * h, mid - 0.25 * (left - right) * offset});
      } else {
        peaks.push_back({0.5 * (post.grid.node(i) + post.grid.node(j)), w[i]});
      }
    }
    i = j + 1;
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.height > b.height; });
  return peaks;
}

/// Largest lambda such that p is strictly monotone on [grid.lo, lambda]:
/// the first sign change of dp/dlambda, bracketed on the grid and refined by
/// bisection. Returns grid.hi when p stays monotone over the whole grid and
/// grid.lo when no definite slope is found.
inline double invertibility_horizon(const MeasurementModel& model, const LambdaGrid& grid) {
  grid.validate();
  constexpr double kSlopeTolerance = 1e-12;
  const auto slope = [&](double x) { return model.derivative(x); };
  int direction = 0;
  std::size_t i = 0;
  for (; i < grid.points; ++i) {
    const double d = slope(grid.node(i));
    if (std::abs(d) > kSlopeTolerance) {
      direction = d > 0.0 ? 1 : -1;
      break;
    }
  }
  if (direction == 0) return grid.lo;
  for (std::size_t k = i + 1; k < grid.points; ++k) {
    if (direction * slope(grid.node(k)) < -kSlopeTolerance) {
      double a = grid.node(k - 1);
      double b = grid.node(k);
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        const double c = 0.5 * (a + b);
        if (direction * slope(c) > 0.0) {
          a = c;
        } else {
          b = c;
        }
      }
      return 0.5 * (a + b);
    }
  }
  return grid.hi;
}

/// Outcome of one estimation run.
struct EstimateReport {
  std::string model;
  double lambda_true = 0.0;
  double lambda_hat = 0.0;
  double variance = 0.0;
  std::vector<Peak> peaks;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> successes;  // one entry per stage
  double cr_bound = std::numeric_limits<double>::quiet_NaN();
  double qcr_bound = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> t_meas;
  std::optional<double> nu;

  /// Records the interaction time and the recovered bare coupling lambda/t.
  void set_measurement_time(double t) {
    if (!(t > 0.0)) throw DomainError("measurement time must be positive");
    t_meas = t;
    nu = lambda_hat / t;
  }
};

namespace detail {

inline double bound_or_nan(double information) {
  return information > 0.0 && std::isfinite(information) ? 1.0 / information
                                                         : std::numeric_limits<double>::quiet_NaN();
}

inline void fill_estimate(EstimateReport& r, const PosteriorGrid& post) {
  const PointEstimate est = point_estimate(post);
  r.lambda_hat = est.mean;
  r.variance = est.variance;
  r.peaks = peak_analysis(post);
}

}  // namespace detail

/// A model together with its probability table on a fixed grid, so repeated
/// campaigns skip re-evaluating the chain dynamics.
struct TabulatedModel {
  MeasurementModel model;
  ProbabilityTable table;

  TabulatedModel(MeasurementModel m, const LambdaGrid& grid)
      : model(std::move(m)), table(tabulate(model, grid)) {}

  const LambdaGrid& grid() const { return table.grid; }
};

/// Flat-prior estimate from one simulated campaign. The data come from
/// sub-stream 0 of `seed`.
inline EstimateReport estimate(const TabulatedModel& tab, double lambda_true, std::uint64_t trials,
                               std::uint64_t seed, PosteriorGrid* posterior_out = nullptr) {
  const auto& grid = tab.grid();
  const auto data = simulate_dataset(tab.model, lambda_true, trials, derive_seed(seed, 0), grid);
  const auto post =
      bayes_update(PosteriorGrid::flat(grid), log_likelihood(tab.table, data.trials, data.successes));
  EstimateReport r;
  r.model = tab.model.describe();
  r.lambda_true = lambda_true;
  r.trials = trials;
  r.successes = {data.successes};
  detail::fill_estimate(r, post);
  const double t = static_cast<double>(trials);
  r.cr_bound = detail::bound_or_nan(t * tab.model.fisher(lambda_true));
  r.qcr_bound = detail::bound_or_nan(t * qfi(tab.model.spec(), tab.model.x0()));
  if (posterior_out) *posterior_out = post;
  return r;
}

inline EstimateReport estimate(const MeasurementModel& model, double lambda_true,
                               std::uint64_t trials, std::uint64_t seed, const LambdaGrid& grid = {},
                               PosteriorGrid* posterior_out = nullptr) {
  return estimate(TabulatedModel(model, grid), lambda_true, trials, seed, posterior_out);
}

/// Feynman-probe campaign (fp_trials, flat prior) whose posterior becomes the
/// prior of a local-measurement campaign (lm_trials). Stage data come from
/// sub-streams 0 and 1 of `seed`, so lm_trials = 0 reproduces `estimate` on
/// the probe model exactly.
///
/// The reported CR bound is that of the combined experiment,
/// 1 / (M1 F_FP + M2 F_LM); the quantum bound uses M1 + M2 trials.
inline EstimateReport two_step_estimate(const TabulatedModel& fp, const TabulatedModel& lm,
                                        double lambda_true, std::uint64_t fp_trials,
                                        std::uint64_t lm_trials, std::uint64_t seed,
                                        PosteriorGrid* posterior_out = nullptr) {
  if (fp_trials < 1) throw DomainError("two-step scheme needs at least one probe trial");
  if (!(fp.grid() == lm.grid())) throw DomainError("two-step stages use different grids");
  if (fp.model.x0() != lm.model.x0()) throw DomainError("two-step stages start from different sites");
  const auto& grid = fp.grid();
  const auto fp_data = simulate_dataset(fp.model, lambda_true, fp_trials, derive_seed(seed, 0), grid);
  PosteriorGrid post =
      bayes_update(PosteriorGrid::flat(grid), log_likelihood(fp.table, fp_data.trials, fp_data.successes));
  EstimateReport r;
  r.model = fp.model.describe() + "+" + lm.model.describe();
  r.lambda_true = lambda_true;
  r.trials = fp_trials + lm_trials;
  r.successes = {fp_data.successes};
  if (lm_trials > 0) {
    const auto lm_data = simulate_dataset(lm.model, lambda_true, lm_trials, derive_seed(seed, 1), grid);
    post = bayes_update(post, log_likelihood(lm.table, lm_data.trials, lm_data.successes));
    r.successes.push_back(lm_data.successes);
  }
  detail::fill_estimate(r, post);
  const double info = static_cast<double>(fp_trials) * fp.model.fisher(lambda_true) +
                      static_cast<double>(lm_trials) * lm.model.fisher(lambda_true);
  r.cr_bound = detail::bound_or_nan(info);
  r.qcr_bound = detail::bound_or_nan(static_cast<double>(r.trials) * qfi(fp.model.spec(), fp.model.x0()));
  if (posterior_out) *posterior_out = post;
  return r;
}

inline EstimateReport two_step_estimate(const ChainSpec& spec, int m_fp, int m_lm, int x0,
                                        double lambda_true, std::uint64_t fp_trials,
                                        std::uint64_t lm_trials, std::uint64_t seed,
                                        const LambdaGrid& grid = {},
                                        PosteriorGrid* posterior_out = nullptr) {
  return two_step_estimate(TabulatedModel(MeasurementModel::probe(spec, m_fp, x0), grid),
                           TabulatedModel(MeasurementModel::local(spec, m_lm, x0), grid), lambda_true,
                           fp_trials, lm_trials, seed, posterior_out);
}

}  // namespace feynprobe
