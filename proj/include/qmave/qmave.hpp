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
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qmave/ade_init.hpp"
#include "qmave/local_fit.hpp"
#include "qmave/numeric_core.hpp"
#include "qmave/qr_solver.hpp"

namespace qmave {

struct QmaveConfig {
  LossSpec loss = LossSpec::Quantile(0.5);
  KernelSpec kernel;
  /// Index-stage bandwidth; nullopt selects it from the initial index.
  std::optional<double> h;
  double h_constant = 1.0;
  /// Constant of the full-dimensional bandwidth used by the automatic
  /// initial estimate.
  double init_h_constant = 2.5;
  TrimSpec trim;
  double tol = 1e-4;
  std::size_t max_iter = 50;
  /// Starting direction; nullopt runs the average-derivative initializer.
  std::optional<Eigen::VectorXd> init;
  double degeneracy_ratio = 0.6;
  SolverOptions solver;
};

struct AnchorFit {
  Eigen::Index anchor = 0;
  double a = 0.0;
  double b = 0.0;
};

struct IndexFit {
  Eigen::VectorXd theta;
  std::size_t iterations = 0;
  bool converged = false;
  /// theta_trace[0] is the starting direction; objective_trace[k] is the
  /// joint objective at theta_trace[k] with its own local fits.
  std::vector<Eigen::VectorXd> theta_trace;
  std::vector<double> objective_trace;
  double bandwidth = 0.0;
  std::optional<InitialEstimate> initial;
};

/// min(|a - b|, |a + b|).
double estimation_error(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                        const Eigen::Ref<const Eigen::VectorXd>& truth);

/// cfg.h if set, otherwise the index-stage rule scaled by sd(X theta).
double resolve_bandwidth(const Dataset& data,
                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const QmaveConfig& cfg);

/// Local-linear fit along theta at every untrimmed anchor X_j. Anchors whose
/// window is too thin are skipped.
std::vector<AnchorFit> inner_step(const Dataset& data,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const QmaveConfig& cfg);

/// Global index update given the local fits: one weighted regression over
/// all (i, j) pairs inside the kernel window, normalized and sign-aligned
/// with theta.
Eigen::VectorXd outer_step(const Dataset& data,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const std::vector<AnchorFit>& fits,
                           const QmaveConfig& cfg);

/// sum_j sum_i K(theta'X_ij / h) loss(Y_i - a_j - b_j theta'X_ij).
double joint_objective(const Dataset& data,
                       const Eigen::Ref<const Eigen::VectorXd>& theta,
                       const std::vector<AnchorFit>& fits,
                       const QmaveConfig& cfg);

/// Alternates inner_step and outer_step until successive directions agree
/// to cfg.tol (up to sign) or cfg.max_iter cycles have run. On exhaustion
/// the lowest-objective direction is returned with converged = false.
IndexFit qmave_fit(const Dataset& data, const QmaveConfig& cfg);

}  // namespace qmave
