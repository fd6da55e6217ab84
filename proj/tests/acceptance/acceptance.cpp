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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances are fixed here and must not be loosened to make a line pass.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "feynprobe/bayes.hpp"
#include "feynprobe/experiments.hpp"
#include "feynprobe/fisher.hpp"
#include "feynprobe/full_space.hpp"
#include "feynprobe/probe.hpp"

using namespace feynprobe;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Verdict qfi_exactness() {
  const ChainSpec spec(10);
  const double e1 = std::abs(qfi(spec, 1) - 1.0), e5 = std::abs(qfi(spec, 5) - 2.0);
  return {e1 < 1e-12 && e5 < 1e-12, fmt("|H(1)-1| = %.1e, |H(5)-2| = %.1e (tol 1e-12)", e1, e5)};
}

Verdict chain_oracle() {
  double worst = 0.0;
  for (int s = 2; s <= 8; ++s) {
    const ChainSpec spec(s);
    const Propagator prop(spec);
    for (int x0 = 1; x0 <= s; ++x0) {
      for (double lambda : {0.5, 1.0, 3.0, 7.0}) {
        const VectorXcd exact = full_space_oracle(spec, x0, lambda).amplitudes;
        worst = std::max(worst, (exact - prop.amplitudes(x0, lambda)).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst < 1e-9, fmt("max amplitude error %.2e over s=2..8 (tol 1e-9)", worst)};
}

Verdict probe_oracle() {
  const ChainSpec spec(10);
  double worst = 0.0;
  for (int m = 1; m <= 9; ++m) {
    for (int x0 = 1; x0 <= m; ++x0) {
      const ProbeConfig cfg{m, x0};
      for (int i = 1; i <= 50; ++i) {
        const double lambda = 0.2 * i;
        const double joint = joint_evolve_oracle(spec, cfg, lambda).register_population(Spin::Up);
        worst = std::max(worst, std::abs(joint - probe_up_probability(spec, cfg, lambda)));
      }
    }
  }
  return {worst < 1e-10, fmt("max |P_joint - P_sum| = %.2e, m=1..9, 50 lambdas (tol 1e-10)", worst)};
}

Eigen::MatrixXcd projector(const VectorXcd& v) { return v * v.adjoint(); }

Verdict sld_consistency() {
  std::mt19937_64 rng(20261015);
  std::uniform_int_distribution<int> site(1, 10);
  std::uniform_real_distribution<double> lam(0.0, 10.0);
  const ChainSpec spec(10);
  const Propagator prop(spec);
  const double h = 1e-5;
  double worst_res = 0.0, worst_eig = 0.0, worst_fi = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int x0 = site(rng);
    const double lambda = lam(rng);
    const Eigen::MatrixXcd l = sld_matrix(spec, x0, lambda);
    const Eigen::MatrixXcd rho = projector(prop.amplitudes(x0, lambda));
    const Eigen::MatrixXcd drho =
        (projector(prop.amplitudes(x0, lambda + h)) - projector(prop.amplitudes(x0, lambda - h))) / (2 * h);
    worst_res = std::max(worst_res, (0.5 * (l * rho + rho * l) - drho).norm());
    const auto sys = sld_eigensystem(spec, x0, lambda);
    for (std::size_t k = 0; k < sys.eigenvectors.size(); ++k) {
      const VectorXcd& v = sys.eigenvectors[k].amplitudes;
      worst_eig = std::max(worst_eig, (l * v - sys.eigenvalues[k] * v).norm());
    }
    worst_fi = std::max(worst_fi, std::abs(sld_measurement_fisher(spec, x0, lambda) - qfi(spec, x0)));
  }
  return {worst_res < 1e-8 && worst_eig < 1e-8 && worst_fi < 1e-8,
          fmt("relation residual %.1e, eigenvector residual %.1e, |F_SLD-H| %.1e (tol 1e-8)", worst_res,
              worst_eig, worst_fi)};
}

Verdict boundary_equivalence() {
  const ChainSpec spec(10);
  const LambdaGrid grid{0.0, 10.0, 1001};
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double l = grid.node(i);
    worst = std::max(worst, std::abs(fisher_probe(spec, 1, 1, l) - fisher_local(spec, 1, 1, l)));
  }
  return {worst < 1e-10, fmt("max |F_probe - F_local| = %.2e at m=1 over [0,10] (tol 1e-10)", worst)};
}

Verdict saturation() {
  const ChainSpec spec(10);
  double worst_rel = 0.0;
  for (int x0 : {1, 5}) {
    worst_rel = std::max(worst_rel, std::abs(fisher_local(spec, x0, x0, 1e-3) / qfi(spec, x0) - 1.0));
  }
  const ChainSpec two(2);
  double worst_two = 0.0;
  for (int i = 0; i <= 1000; ++i) worst_two = std::max(worst_two, std::abs(fisher_local(two, 1, 1, 0.01 * i) - 1.0));
  return {worst_rel < 1e-3 && worst_two < 1e-10,
          fmt("rel gap at lambda=1e-3: %.2e (tol 1e-3); s=2 max |F-1| = %.1e", worst_rel, worst_two)};
}

std::size_t peaks_above_half(const PosteriorGrid& post) {
  return peak_analysis(post, 0.5).size();
}

Verdict bimodality() {
  const ChainSpec spec(10);
  PosteriorGrid lm_post, fp_post;
  estimate(MeasurementModel::local(spec, 2, 1), 3.0, 10000, 1, {}, &lm_post);
  estimate(MeasurementModel::probe(spec, 2, 1), 3.0, 10000, 1, {}, &fp_post);
  const auto nl = peaks_above_half(lm_post), nf = peaks_above_half(fp_post);
  return {nl == 2 && nf == 1, fmt("peaks above half-maximum: LM %zu, FP %zu", nl, nf)};
}

struct SeedStats {
  double mean;
  double sem;
};

SeedStats seed_average(std::size_t seeds, const std::function<EstimateReport(std::uint64_t)>& run) {
  const auto reports = parallel_map(seeds, [&](std::size_t k) { return run(derive_seed(7, k)); });
  double sum = 0.0, ss = 0.0;
  for (const auto& r : reports) sum += r.variance;
  const double n = static_cast<double>(seeds), mean = sum / n;
  for (const auto& r : reports) ss += (r.variance - mean) * (r.variance - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

constexpr std::size_t kSeeds = 50;

Verdict cr_saturation() {
  const ChainSpec spec(10);
  const LambdaGrid grid;
  const double lt = 3.0, h = qfi(spec, 1);
  bool ok = true;
  std::string detail;
  for (int m : {2, 3}) {
    const TabulatedModel fp(MeasurementModel::probe(spec, m, 1), grid);
    const TabulatedModel lm(MeasurementModel::local(spec, m, 1), grid);
    for (std::uint64_t trials : {1000ull, 10000ull}) {
      const double mt = static_cast<double>(trials);
      const auto fp_s = seed_average(kSeeds, [&](auto seed) { return estimate(fp, lt, trials, seed); });
      const auto lm_s = seed_average(kSeeds, [&](auto seed) { return estimate(lm, lt, trials, seed); });
      const auto two_s = seed_average(
          kSeeds, [&](auto seed) { return two_step_estimate(fp, lm, lt, trials / 2, trials - trials / 2, seed); });
      const double qcr = 1.0 / (mt * h);
      for (const auto& s : {fp_s, lm_s, two_s}) ok = ok && s.mean + 3 * s.sem >= qcr;
      if (trials == 10000) {
        const double cr = 1.0 / (mt * fp.model.fisher(lt));
        const double rel = fp_s.mean / cr - 1.0;
        ok = ok && std::abs(rel) <= 0.25;
        detail += fmt("m=%d: sigma2_FP/CR - 1 = %+.3f; ", m, rel);
      }
    }
  }
  return {ok, detail + "no mean below QCR by > 3 SE (LM, FP, FP+LM; M=1e3,1e4; 50 seeds)"};
}

// Matched total M: the two stages share M (M/2 each) against the probe alone
// with all M trials.
Verdict two_step_improvement() {
  const ChainSpec spec(10);
  const LambdaGrid grid;
  const double lt = 3.0;
  const std::uint64_t total = 10000;
  bool ok = true;
  std::string detail;
  for (int m : {2, 3}) {
    const TabulatedModel fp(MeasurementModel::probe(spec, m, 1), grid);
    const TabulatedModel lm(MeasurementModel::local(spec, m, 1), grid);
    const auto fp_s = seed_average(kSeeds, [&](auto seed) { return estimate(fp, lt, total, seed); });
    const auto two_s = seed_average(
        kSeeds, [&](auto seed) { return two_step_estimate(fp, lm, lt, total / 2, total - total / 2, seed); });
    ok = ok && two_s.mean <= fp_s.mean;
    detail += fmt("m=%d: FP+LM %.3e vs FP %.3e; ", m, two_s.mean, fp_s.mean);
  }
  return {ok, detail + "M=1e4 total, 50 seeds"};
}

// Same comparison with M trials in each stage (2M in total); reported only.
std::string two_step_per_stage() {
  const ChainSpec spec(10);
  const LambdaGrid grid;
  std::string detail;
  for (int m : {2, 3}) {
    const TabulatedModel fp(MeasurementModel::probe(spec, m, 1), grid);
    const TabulatedModel lm(MeasurementModel::local(spec, m, 1), grid);
    const auto fp_s = seed_average(kSeeds, [&](auto seed) { return estimate(fp, 3.0, 10000, seed); });
    const auto two_s =
        seed_average(kSeeds, [&](auto seed) { return two_step_estimate(fp, lm, 3.0, 10000, 10000, seed); });
    detail += fmt("m=%d: FP+LM %.3e vs FP %.3e (%s); ", m, two_s.mean, fp_s.mean,
                  two_s.mean <= fp_s.mean ? "lower" : "higher");
  }
  return detail + "M=1e4 per stage";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "feynprobe_acceptance";
  fs::remove_all(root);
  const char* commands[] = {
      "fisher-scan",
      "prob-scan --format json",
      "qfi",
      "bayes --models LM,FP,FP+LM --seeds 4 --t-meas 2",
      "variance-scan --trials 100,1000 --seeds 8",
  };
  std::size_t compared = 0;
  for (const char* cmd : commands) {
    for (const char* run : {"a", "b"}) {
      const std::string threads = run[0] == 'a' ? " --threads 1" : " --threads 4";
      const std::string line = std::string("\"") + FEYNPROBE_CLI_PATH + "\" " + cmd + threads + " --seed 42" +
                               " --out-dir \"" + (root / run).string() + "\" > /dev/null";
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string("command failed: ") + cmd};
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      return {false, "differs: " + entry.path().filename().string()};
    }
    ++compared;
  }
  fs::remove_all(root);
  return {compared == 6, fmt("%zu output files byte-identical across reruns (1 vs 4 threads)", compared)};
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"qfi-exactness", qfi_exactness},
      {"chain-oracle", chain_oracle},
      {"probe-oracle", probe_oracle},
      {"sld-consistency", sld_consistency},
      {"boundary-equivalence", boundary_equivalence},
      {"saturation-limit", saturation},
      {"bimodality-split", bimodality},
      {"cr-saturation", cr_saturation},
      {"two-step-improvement", two_step_improvement},
      {"determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %-22s %s (%.2fs)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("[INFO] %-22s %s\n", "two-step-per-stage", two_step_per_stage().c_str());
  std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
