// Copyright 2026 The Memex Authors.
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

#ifndef MEMEX_TESTS_SUPPORT_GRAD_CHECK_H_
#define MEMEX_TESTS_SUPPORT_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "memex/layers.h"
#include "memex/random.h"

namespace memex::testing {

struct GradCheckResult {
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double analytic_norm = 0.0;
  std::size_t probes = 0;
  std::string worst;  // parameter with the largest entry-wise discrepancy
};

// Central finite differences on up to `per_param` entries of each listed
// parameter (all entries when the parameter is smaller).
inline GradCheckResult CheckGradients(const std::function<ag::Var()> &loss,
                                      const std::vector<NamedParameter> &params,
                                      int per_param = 24, std::uint64_t seed = 1, double h = 1e-5) {
  for (const auto &p : params) {
    ag::Var v = p.var;
    v.ZeroGrad();
  }
  ag::Backward(loss());

  Rng rng(seed);
  std::vector<double> analytic, numeric;
  double worst_gap = -1.0;
  GradCheckResult r;
  for (const auto &p : params) {
    ag::Var var = p.var;
    const std::size_t n = var.value().size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (n > std::size_t(per_param)) {
      rng.Shuffle(idx);
      idx.resize(per_param);
    }
    for (std::size_t k : idx) {
      const double saved = var.value()[k];
      double plus, minus;
      {
        ag::NoGradGuard guard;
        var.mutable_value()[k] = saved + h;
        plus = loss().value()[0];
        var.mutable_value()[k] = saved - h;
        minus = loss().value()[0];
        var.mutable_value()[k] = saved;
      }
      const double num = (plus - minus) / (2 * h);
      const double ana = var.grad()[k];
      analytic.push_back(ana);
      numeric.push_back(num);
      if (std::fabs(ana - num) > worst_gap) {
        worst_gap = std::fabs(ana - num);
        r.worst = p.name;
      }
    }
  }
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  r.probes = analytic.size();
  r.analytic_norm = std::sqrt(na);
  const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-300});
  r.rel_error = std::sqrt(diff) / scale;
  return r;
}

}  // namespace memex::testing

#endif  // MEMEX_TESTS_SUPPORT_GRAD_CHECK_H_
