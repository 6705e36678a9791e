// Copyright 2026 The fvae Authors. All Rights Reserved.
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

#ifndef FVAE_TESTS_TEST_UTIL_HPP_
#define FVAE_TESTS_TEST_UTIL_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fvae/corpus.hpp"
#include "fvae/nn/tensor.hpp"
#include "fvae/random.hpp"

namespace fvae::testing {

// Norm-wise relative error per tensor: |a - n| / max(|a|, |n|, floor). The
// floor covers tensors whose exact gradient is zero, such as a conv bias
// feeding a norm layer.
inline double RelativeError(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                            double floor = 1e-6) {
  const double denom = std::max({analytic.norm(), numeric.norm(), floor});
  return (analytic - numeric).norm() / denom;
}

// Central differences of `loss` with respect to every entry of `x`.
inline Eigen::MatrixXd NumericGradient(Eigen::MatrixXd& x, const std::function<double()>& loss,
                                       double h = 1e-6) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = loss();
    x.data()[i] = saved - h;
    const double down = loss();
    x.data()[i] = saved;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

struct GradCheck {
  double max_error = 0.0;
  std::string worst;
};

// `run(backward)` performs a forward pass, returns the loss and, when
// `backward` is true, accumulates analytic gradients into the parameters.
inline GradCheck CheckParamGradients(const std::vector<nn::Param<double>*>& params,
                                     const std::function<double(bool)>& run, double h = 1e-6) {
  for (auto* p : params) p->ZeroGrad();
  // Central differences carry roundoff of order eps * |L| / h per entry.
  const double floor = 1e-5 * std::max(1.0, std::abs(run(true)));
  std::vector<Eigen::MatrixXd> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  GradCheck out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Eigen::MatrixXd numeric =
        NumericGradient(params[k]->value, [&] { return run(false); }, h);
    const double err = RelativeError(analytic[k], numeric, floor);
    if (err > out.max_error) {
      out.max_error = err;
      out.worst = params[k]->name;
    }
  }
  return out;
}

inline Eigen::MatrixXd RandomMatrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * StandardNormal(rng);
  return m;
}

inline nn::Seq<double> RandomSeq(int channels, int batch, int frames, Rng& rng,
                                 double scale = 1.0) {
  return nn::Seq<double>(RandomMatrix(channels, batch * frames, rng, scale), batch, frames);
}

// A small featurized toy corpus, built once per test binary.
inline const FeatureBank& SmallToyBank() {
  static const FeatureBank bank = [] {
    ToyCorpusConfig tc;
    tc.n_speakers = 4;
    tc.n_phones = 6;
    tc.utterances_per_speaker = 8;
    tc.min_duration = 2.5;
    tc.max_duration = 3.5;
    return ToyFeatureBank(GenerateToyCorpus(tc, FeatureConfig(), 7), FeatureConfig(), 7, true);
  }();
  return bank;
}

}  // namespace fvae::testing

#endif  // FVAE_TESTS_TEST_UTIL_HPP_
