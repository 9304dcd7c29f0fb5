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

#include "qmave/local_fit.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "qmave/error.hpp"

namespace qmave {

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.cols() < 1) throw InvalidInputError("dataset needs d >= 1");
  if (x_.rows() != y_.size()) {
    throw InvalidInputError("covariate rows and response length differ");
  }
  if (x_.rows() < 2 * (x_.cols() + 1)) {
    throw InsufficientDataError(
        "dataset has n = " + std::to_string(x_.rows()) + " rows but d = " +
        std::to_string(x_.cols()) + " needs at least " +
        std::to_string(2 * (x_.cols() + 1)));
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw InvalidInputError("dataset contains non-finite values");
  }
}

LocalFit local_linear_index_fit(const Eigen::Ref<const Eigen::VectorXd>& index,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                double center, double h, const LossSpec& loss,
                                const KernelSpec& k,
                                const SolverOptions& opts) {
  if (!(h > 0.0)) throw InvalidInputError("bandwidth must be positive");
  std::vector<Eigen::Index> rows;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    const double wi = kernel_eval(k, (index[i] - center) / h);
    if (wi > 0.0) {
      rows.push_back(i);
      weights.push_back(wi);
    }
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  WeightedRegressionProblem prob{Eigen::MatrixXd(m, 2), Eigen::VectorXd(m),
                                 Eigen::VectorXd(m), loss};
  double lo = 0.0, hi = 0.0, total = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    const double u = index[i] - center;
    prob.design(r, 0) = 1.0;
    prob.design(r, 1) = u;
    prob.response[r] = y[i];
    prob.weights[r] = weights[static_cast<std::size_t>(r)];
    total += prob.weights[r];
    lo = r == 0 ? u : std::min(lo, u);
    hi = r == 0 ? u : std::max(hi, u);
  }
  if (m < 2 || !(hi > lo)) {
    throw InsufficientDataError("kernel window holds fewer than two distinct "
                                "index values");
  }
  const Eigen::VectorXd beta = solve_weighted(prob, opts);
  LocalFit fit;
  fit.a = beta[0];
  fit.b = beta.tail(1);
  fit.effective_weight = total;
  return fit;
}

LocalFit local_linear_index_fit(const Dataset& data,
                                const Eigen::Ref<const Eigen::VectorXd>& theta,
                                const Eigen::Ref<const Eigen::VectorXd>& x0,
                                double h, const LossSpec& loss,
                                const KernelSpec& k,
                                const SolverOptions& opts) {
  if (theta.size() != data.d() || x0.size() != data.d()) {
    throw InvalidInputError("index direction or anchor has wrong dimension");
  }
  const Eigen::VectorXd index = data.x() * theta;
  return local_linear_index_fit(index, data.y(), theta.dot(x0), h, loss, k,
                                opts);
}

LocalFit local_linear_full_fit(const Dataset& data,
                               const Eigen::Ref<const Eigen::VectorXd>& x0,
                               double h0, const LossSpec& loss,
                               const KernelSpec& k,
                               const SolverOptions& opts) {
  if (!(h0 > 0.0)) throw InvalidInputError("bandwidth must be positive");
  const auto d = data.d();
  if (x0.size() != d) throw InvalidInputError("anchor has wrong dimension");
  std::vector<Eigen::Index> rows;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double wi = 1.0;
    for (Eigen::Index l = 0; l < d && wi > 0.0; ++l) {
      wi *= kernel_eval(k, (data.x()(i, l) - x0[l]) / h0);
    }
    if (wi > 0.0) {
      rows.push_back(i);
      weights.push_back(wi);
    }
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  if (m < d + 1) {
    throw InsufficientDataError("kernel window holds " + std::to_string(m) +
                                " rows, needs " + std::to_string(d + 1));
  }
  WeightedRegressionProblem prob{Eigen::MatrixXd(m, d + 1),
                                 Eigen::VectorXd(m), Eigen::VectorXd(m), loss};
  double total = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    prob.design(r, 0) = 1.0;
    prob.design.row(r).tail(d) = data.x().row(i) - x0.transpose();
    prob.response[r] = data.y()[i];
    prob.weights[r] = weights[static_cast<std::size_t>(r)];
    total += prob.weights[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(prob.design);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() < d + 1) {
    throw InsufficientDataError("kernel window rows are not in general "
                                "position");
  }
  Eigen::VectorXd beta;
  try {
    beta = solve_weighted(prob, opts);
  } catch (const DegenerateProblemError& e) {
    throw InsufficientDataError(std::string("local fit degenerate: ") +
                                e.what());
  }
  LocalFit fit;
  fit.a = beta[0];
  fit.b = beta.tail(d);
  fit.effective_weight = total;
  return fit;
}

}  // namespace qmave
