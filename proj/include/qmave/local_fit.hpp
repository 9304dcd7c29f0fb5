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

#include <Eigen/Dense>

#include "qmave/numeric_core.hpp"
#include "qmave/qr_solver.hpp"

namespace qmave {

/// n observations of a d-dimensional covariate and a scalar response.
/// Construction enforces d >= 1, n >= 2(d+1) and finite entries.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index d() const { return x_.cols(); }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
};

struct LocalFit {
  double a = 0.0;
  Eigen::VectorXd b;  // length 1 for index fits, d for full fits
  double effective_weight = 0.0;
};

/// Local-linear fit along the index theta'x around x0:
/// minimizes sum_i K(u_i/h) loss(Y_i - a - b u_i), u_i = theta'(X_i - x0).
/// Throws InsufficientDataError when fewer than two distinct u_i carry
/// positive weight.
LocalFit local_linear_index_fit(const Dataset& data,
                                const Eigen::Ref<const Eigen::VectorXd>& theta,
                                const Eigen::Ref<const Eigen::VectorXd>& x0,
                                double h, const LossSpec& loss,
                                const KernelSpec& k,
                                const SolverOptions& opts = {});

/// Same fit expressed on precomputed index values v_i = theta'X_i, centred
/// at `center`. Used by the alternating estimator to avoid recomputing
/// projections for every anchor.
LocalFit local_linear_index_fit(const Eigen::Ref<const Eigen::VectorXd>& index,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                double center, double h, const LossSpec& loss,
                                const KernelSpec& k,
                                const SolverOptions& opts = {});

/// Full-dimensional local-linear fit around x0 with the product kernel
/// prod_l K((X_il - x0_l)/h0). Throws InsufficientDataError when the window
/// holds fewer than d+1 rows in general position.
LocalFit local_linear_full_fit(const Dataset& data,
                               const Eigen::Ref<const Eigen::VectorXd>& x0,
                               double h0, const LossSpec& loss,
                               const KernelSpec& k,
                               const SolverOptions& opts = {});

}  // namespace qmave
