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


// Quickstart: information budget of three measurements on a 10-site chain,
// then one Bayesian estimate of the coupling from simulated probe data.

#include <cstdio>

#include "feynprobe/bayes.hpp"
#include "feynprobe/fisher.hpp"

int main() {
  using namespace feynprobe;
  const ChainSpec chain(10);
  const int x0 = 1, m = 2;
  const double lambda = 3.0;

  std::printf("QFI H = %.6f\n", qfi(chain, x0));
  std::printf("local site %d:   F = %.6f\n", m, fisher_local(chain, x0, m, lambda));
  std::printf("probe after %d:  F = %.6f\n", m, fisher_probe(chain, x0, m, lambda));
  std::printf("SLD basis:      F = %.6f\n", sld_measurement_fisher(chain, x0, lambda));

  const auto report = estimate(MeasurementModel::probe(chain, m, x0), lambda, 10000, /*seed=*/1);
  std::printf("%s: lambda_hat = %.4f, sigma^2 = %.3e (CR %.3e, QCR %.3e), %zu peak(s)\n", report.model.c_str(),
              report.lambda_hat, report.variance, report.cr_bound, report.qcr_bound, report.peaks.size());
}
