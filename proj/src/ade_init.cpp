// Copyright 2026 The qmave Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmave/ade_init.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmave/error.hpp"
#include "qmave/stats.hpp"

namespace qmave {

std::string_view to_string(InitMethod m) {
  return m == InitMethod::kAde ? "ADE" : "OPG";
}

double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<bool> trim_mask(const Eigen::MatrixXd& x, const TrimSpec& trim) {
  if (!(trim.alpha >= 0.0 && trim.alpha < 0.5)) {
    throw InvalidInputError("trim alpha must lie in [0, 0.5)");
  }
  const auto n = x.rows();
  std::vector<bool> mask(static_cast<std::size_t>(n), true);
  if (n == 0) return mask;
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < x.cols(); ++l) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = x(i, l);
    std::sort(col.begin(), col.end());
    const double lo = sorted_quantile(col, trim.alpha);
    const double hi = sorted_quantile(col, 1.0 - trim.alpha);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = x(i, l);
      if (v < lo || v > hi) mask[static_cast<std::size_t>(i)] = false;
    }
  }
  return mask;
}

std::vector<bool> trim_mask(const Dataset& data, const TrimSpec& trim) {
  return trim_mask(data.x(), trim);
}

void canonical_sign(Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

Eigen::VectorXd opg_direction(const std::vector<Eigen::VectorXd>& slopes) {
  if (slopes.empty()) throw DegenerateProblemError("no slopes to combine");
  const auto d = slopes.front().size();
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
  for (const auto& b : slopes) outer.noalias() += b * b.transpose();
  outer /= static_cast<double>(slopes.size());
  if (outer.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateProblemError("all slopes are zero; no direction");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(outer);
  Eigen::VectorXd v = eig.eigenvectors().col(d - 1);
  v.normalize();
  canonical_sign(v);
  return v;
}

InitialEstimate combine_slopes(const std::vector<Eigen::VectorXd>& slopes,
                               double degeneracy_ratio) {
  if (slopes.empty()) throw DegenerateProblemError("no slopes to combine");
  const auto d = slopes.front().size();
  std::vector<NeumaierSum> mean(static_cast<std::size_t>(d));
  NeumaierSum norms;
  for (const auto& b : slopes) {
    for (Eigen::Index l = 0; l < d; ++l) mean[static_cast<std::size_t>(l)].add(b[l]);
    norms.add(b.norm());
  }
  const double m = static_cast<double>(slopes.size());
  Eigen::VectorXd v(d);
  for (Eigen::Index l = 0; l < d; ++l) v[l] = mean[static_cast<std::size_t>(l)].value() / m;
  const double avg_norm = norms.value() / m;

  InitialEstimate est;
  est.mean_slope_norm = v.norm();
  if (est.mean_slope_norm > 0.0 &&
      est.mean_slope_norm >= degeneracy_ratio * avg_norm) {
    est.theta = v / est.mean_slope_norm;
    canonical_sign(est.theta);
    est.method_used = InitMethod::kAde;
  } else {
    est.theta = opg_direction(slopes);
    est.method_used = InitMethod::kOpg;
  }
  return est;
}

double full_dim_bandwidth(const Dataset& data, double constant) {
  double log_sum = 0.0;
  for (Eigen::Index l = 0; l < data.d(); ++l) {
    log_sum += std::log(sample_sd(data.x().col(l)));
  }
  const double scale = std::exp(log_sum / static_cast<double>(data.d()));
  return default_bandwidth(
      BandwidthRule::FullDim(static_cast<std::size_t>(data.d()), constant),
      static_cast<std::size_t>(data.n()), scale);
}

InitialEstimate ade_initial_estimate(const Dataset& data, const LossSpec& loss,
                                     double h0, const TrimSpec& trim,
                                     const KernelSpec& k,
                                     double degeneracy_ratio,
                                     const SolverOptions& opts) {
  const auto mask = trim_mask(data, trim);
  std::vector<Eigen::VectorXd> slopes;
  std::size_t trimmed = 0;
  for (Eigen::Index j = 0; j < data.n(); ++j) {
    if (!mask[static_cast<std::size_t>(j)]) {
      ++trimmed;
      continue;
    }
    try {
      slopes.push_back(
          local_linear_full_fit(data, data.x().row(j).transpose(), h0, loss, k,
                                opts)
              .b);
    } catch (const InsufficientDataError&) {
      ++trimmed;
    }
  }
  if (static_cast<Eigen::Index>(slopes.size()) < data.d() + 1) {
    throw InsufficientDataError(
        "initial estimate needs " + std::to_string(data.d() + 1) +
        " usable local fits, got " + std::to_string(slopes.size()));
  }
  InitialEstimate est = combine_slopes(slopes, degeneracy_ratio);
  est.trimmed_count = trimmed;
  return est;
}

}  // namespace qmave
