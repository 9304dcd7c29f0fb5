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

#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "qmave/error.hpp"
#include "qmave/numeric_core.hpp"

namespace qmave {

/// Minimize sum_i w_i * loss(y_i - z_i' beta) over beta.
struct WeightedRegressionProblem {
  Eigen::MatrixXd design;    // n x p
  Eigen::VectorXd response;  // n
  Eigen::VectorXd weights;   // n, finite and >= 0
  LossSpec loss = LossSpec::Quantile(0.5);
};

struct SolverOptions {
  double objective_tolerance = 1e-9;
  /// Budget for exact vertex pivots after the smoothing phase.
  std::size_t max_iterations = 200;
  double regularization_floor = 1e-12;
};

/// Raised when the exact phase runs out of pivots. Carries the best
/// coefficient vector seen so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd best)
      : Error(what), best_(std::move(best)) {}
  const Eigen::VectorXd& best() const { return best_; }

 private:
  Eigen::VectorXd best_;
};

double regression_objective(const WeightedRegressionProblem& problem,
                            const Eigen::Ref<const Eigen::VectorXd>& beta);

/// Weighted linear quantile regression. A smoothed (quadratic-kink)
/// reweighted least-squares path supplies a starting point, which is then
/// snapped to a basic solution and improved by exact edge descent until no
/// edge of the current vertex decreases the objective.
Eigen::VectorXd solve_weighted_qr(const WeightedRegressionProblem& problem,
                                  const SolverOptions& opts = {});

/// Weighted least squares through ridge-stabilized normal equations.
Eigen::VectorXd solve_weighted_ls(const WeightedRegressionProblem& problem,
                                  const SolverOptions& opts = {});

/// Dispatches on problem.loss.
Eigen::VectorXd solve_weighted(const WeightedRegressionProblem& problem,
                               const SolverOptions& opts = {});

/// Exhaustive basic-solution enumeration for small problems (n <= 15,
/// p <= 4). Test oracle only.
Eigen::VectorXd qr_oracle(const WeightedRegressionProblem& problem);

}  // namespace qmave
