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
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qmave/local_fit.hpp"
#include "qmave/numeric_core.hpp"

namespace qmave {

/// Per-coordinate quantile-box trimming. alpha in [0, 0.5).
struct TrimSpec {
  double alpha = 0.05;
};

enum class InitMethod { kAde, kOpg };

std::string_view to_string(InitMethod m);

struct InitialEstimate {
  Eigen::VectorXd theta;
  InitMethod method_used = InitMethod::kAde;
  std::size_t trimmed_count = 0;
  double mean_slope_norm = 0.0;
};

/// Type-7 empirical quantile of already sorted values.
double sorted_quantile(const std::vector<double>& sorted, double prob);

/// true for rows whose every coordinate lies inside that coordinate's
/// [alpha, 1-alpha] empirical quantile interval (type-7 interpolation).
std::vector<bool> trim_mask(const Eigen::MatrixXd& x, const TrimSpec& trim);
std::vector<bool> trim_mask(const Dataset& data, const TrimSpec& trim);

/// Flips v so that its largest-magnitude coordinate is positive.
void canonical_sign(Eigen::VectorXd& v);

/// Unit leading eigenvector of (1/m) sum b b', canonical sign.
/// Throws DegenerateProblemError if every slope is zero.
Eigen::VectorXd opg_direction(const std::vector<Eigen::VectorXd>& slopes);

/// Chooses between the normalized mean slope and the outer-product
/// direction. The mean slope is used when |mean| >= ratio * mean(|b_j|).
InitialEstimate combine_slopes(const std::vector<Eigen::VectorXd>& slopes,
                               double degeneracy_ratio = 0.6);

/// Geometric mean of the coordinate standard deviations times the
/// full-dimensional rate.
double full_dim_bandwidth(const Dataset& data, double constant = 1.0);

/// Average-derivative initial index from trimmed local full-dimensional
/// slopes, falling back to the outer product of slopes when the average
/// derivative vanishes (even links).
InitialEstimate ade_initial_estimate(const Dataset& data, const LossSpec& loss,
                                     double h0, const TrimSpec& trim,
                                     const KernelSpec& k,
                                     double degeneracy_ratio = 0.6,
                                     const SolverOptions& opts = {});

}  // namespace qmave
