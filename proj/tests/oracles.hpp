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

// Independent reference computations shared by the test suites. Nothing in
// here calls into the solver paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qmave/qr_solver.hpp"

namespace qmave::testing {

inline double pinball(double v, double tau) {
  return v > 0.0 ? tau * v : (tau - 1.0) * v;
}

inline double weighted_pinball_objective(const Eigen::MatrixXd& z,
                                         const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& w, double tau,
                                         const Eigen::VectorXd& beta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double fit = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) fit += z(i, k) * beta[k];
    total += w[i] * pinball(y[i] - fit, tau);
  }
  return total;
}

/// Lower weighted tau-quantile: the smallest y_(k) whose cumulative weight
/// reaches tau * W. It minimizes sum_i w_i rho_tau(y_i - b).
inline double weighted_quantile(std::vector<double> y, std::vector<double> w,
                                double tau) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double acc = 0.0;
  for (auto i : order) {
    acc += w[i];
    if (acc >= tau * total) return y[i];
  }
  return y[order.back()];
}

/// Textbook normal equations solved by Gauss-Jordan elimination with
/// partial pivoting on explicit loops.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& z,
                                        const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& w) {
  const auto p = z.cols();
  std::vector<std::vector<double>> a(static_cast<std::size_t>(p),
                                     std::vector<double>(static_cast<std::size_t>(p + 1), 0.0));
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < z.rows(); ++i) s += w[i] * z(i, r) * z(i, c);
      a[r][c] = s;
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) s += w[i] * z(i, r) * y[i];
    a[r][p] = s;
  }
  for (Eigen::Index col = 0; col < p; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < p; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (Eigen::Index r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (Eigen::Index c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Eigen::VectorXd beta(p);
  for (Eigen::Index r = 0; r < p; ++r) beta[r] = a[r][p] / a[r][r];
  return beta;
}

struct RandomProblem {
  WeightedRegressionProblem problem;
  double tau;
};

/// Random weighted quantile-regression instance with an intercept column.
inline RandomProblem random_problem(std::mt19937_64& rng, int max_n, int max_p,
                                    const std::vector<double>& taus) {
  std::uniform_int_distribution<int> pick_p(1, max_p);
  const int p = pick_p(rng);
  std::uniform_int_distribution<int> pick_n(p + 1, max_n);
  const int n = pick_n(rng);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  std::uniform_int_distribution<std::size_t> pick_tau(0, taus.size() - 1);
  const double tau = taus[pick_tau(rng)];
  WeightedRegressionProblem prob{Eigen::MatrixXd(n, p), Eigen::VectorXd(n),
                                 Eigen::VectorXd(n), LossSpec::Quantile(tau)};
  for (int i = 0; i < n; ++i) {
    prob.design(i, 0) = 1.0;
    for (int k = 1; k < p; ++k) prob.design(i, k) = normal(rng);
    prob.response[i] = normal(rng) * 2.0 + 0.5 * prob.design.row(i).sum();
    prob.weights[i] = unif(rng);
  }
  return {prob, tau};
}

}  // namespace qmave::testing
