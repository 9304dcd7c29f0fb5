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

#include "qmave/qmave.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmave/error.hpp"
#include "qmave/stats.hpp"

namespace qmave {
namespace {

// Anchors ordered by index value so each kernel window is a contiguous run.
struct SortedIndex {
  Eigen::VectorXd value;
  std::vector<Eigen::Index> order;

  SortedIndex(const Dataset& data,
              const Eigen::Ref<const Eigen::VectorXd>& theta)
      : value(data.x() * theta), order(static_cast<std::size_t>(data.n())) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return value[a] < value[b];
                     });
  }

  // Rows with |value_i - center| <= h, in original row order.
  std::vector<Eigen::Index> window(double center, double h) const {
    auto lo = std::lower_bound(order.begin(), order.end(), center - h,
                               [&](Eigen::Index i, double v) {
                                 return value[i] < v;
                               });
    auto hi = std::upper_bound(order.begin(), order.end(), center + h,
                               [&](double v, Eigen::Index i) {
                                 return v < value[i];
                               });
    std::vector<Eigen::Index> rows(lo, hi);
    std::sort(rows.begin(), rows.end());
    return rows;
  }
};

Eigen::VectorXd checked_unit(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateProblemError("index update produced a zero direction");
  }
  return v / norm;
}

template <typename E>
[[noreturn]] void rethrow_with(const E& e, std::size_t iteration) {
  throw E("iteration " + std::to_string(iteration) + ": " + e.what());
}

}  // namespace

double estimation_error(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                        const Eigen::Ref<const Eigen::VectorXd>& truth) {
  return std::min((estimate - truth).norm(), (estimate + truth).norm());
}

double resolve_bandwidth(const Dataset& data,
                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const QmaveConfig& cfg) {
  if (cfg.h) {
    if (!(*cfg.h > 0.0)) throw InvalidInputError("bandwidth must be positive");
    return *cfg.h;
  }
  const Eigen::VectorXd index = data.x() * theta;
  return default_bandwidth(BandwidthRule::Index(cfg.h_constant),
                           static_cast<std::size_t>(data.n()),
                           sample_sd(index));
}

std::vector<AnchorFit> inner_step(const Dataset& data,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const QmaveConfig& cfg) {
  const double h = resolve_bandwidth(data, theta, cfg);
  const auto mask = trim_mask(data, cfg.trim);
  const SortedIndex idx(data, theta);
  std::vector<AnchorFit> fits;
  for (Eigen::Index j = 0; j < data.n(); ++j) {
    if (!mask[static_cast<std::size_t>(j)]) continue;
    const auto rows = idx.window(idx.value[j], h);
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd local_index(m), local_y(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      local_index[r] = idx.value[rows[static_cast<std::size_t>(r)]];
      local_y[r] = data.y()[rows[static_cast<std::size_t>(r)]];
    }
    try {
      const LocalFit f = local_linear_index_fit(
          local_index, local_y, idx.value[j], h, cfg.loss, cfg.kernel,
          cfg.solver);
      fits.push_back({j, f.a, f.b[0]});
    } catch (const InsufficientDataError&) {
    }
  }
  if (fits.size() < 2) {
    throw InsufficientDataError("fewer than two anchors have usable local "
                                "fits");
  }
  return fits;
}

Eigen::VectorXd outer_step(const Dataset& data,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const std::vector<AnchorFit>& fits,
                           const QmaveConfig& cfg) {
  if (fits.empty()) throw InvalidInputError("outer step needs local fits");
  const double h = resolve_bandwidth(data, theta, cfg);
  const SortedIndex idx(data, theta);
  const auto d = data.d();

  std::vector<std::vector<Eigen::Index>> windows;
  windows.reserve(fits.size());
  Eigen::Index rows = 0;
  for (const auto& f : fits) {
    windows.push_back(idx.window(idx.value[f.anchor], h));
    rows += static_cast<Eigen::Index>(windows.back().size());
  }
  WeightedRegressionProblem prob{Eigen::MatrixXd(rows, d),
                                 Eigen::VectorXd(rows), Eigen::VectorXd(rows),
                                 cfg.loss};
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const auto& f = fits[k];
    const auto xj = data.x().row(f.anchor);
    for (auto i : windows[k]) {
      const double w =
          kernel_eval(cfg.kernel, (idx.value[i] - idx.value[f.anchor]) / h);
      if (!(w > 0.0)) continue;
      prob.design.row(r) = f.b * (data.x().row(i) - xj);
      prob.response[r] = data.y()[i] - f.a;
      prob.weights[r] = w;
      ++r;
    }
  }
  prob.design.conservativeResize(r, d);
  prob.response.conservativeResize(r);
  prob.weights.conservativeResize(r);
  if (r == 0 || prob.design.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateProblemError("index update is degenerate: every local "
                                 "slope is zero");
  }
  Eigen::VectorXd next;
  try {
    next = checked_unit(solve_weighted(prob, cfg.solver));
  } catch (const DegenerateProblemError& e) {
    throw DegenerateProblemError(std::string("index update is degenerate: ") +
                                 e.what());
  }
  if (next.dot(theta) < 0.0) next = -next;
  return next;
}

double joint_objective(const Dataset& data,
                       const Eigen::Ref<const Eigen::VectorXd>& theta,
                       const std::vector<AnchorFit>& fits,
                       const QmaveConfig& cfg) {
  const double h = resolve_bandwidth(data, theta, cfg);
  const SortedIndex idx(data, theta);
  NeumaierSum total;
  for (const auto& f : fits) {
    const double vj = idx.value[f.anchor];
    for (auto i : idx.window(vj, h)) {
      const double u = idx.value[i] - vj;
      const double w = kernel_eval(cfg.kernel, u / h);
      if (w > 0.0) total.add(w * check_loss(data.y()[i] - f.a - f.b * u, cfg.loss));
    }
  }
  return total.value();
}

IndexFit qmave_fit(const Dataset& data, const QmaveConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidInputError("tolerance must be positive");
  if (cfg.max_iter < 1) throw InvalidInputError("max_iter must be >= 1");

  IndexFit out;
  Eigen::VectorXd theta;
  if (cfg.init) {
    if (cfg.init->size() != data.d()) {
      throw InvalidInputError("initial direction has wrong dimension");
    }
    if (std::abs(cfg.init->norm() - 1.0) > 1e-8) {
      throw InvalidInputError("initial direction must be unit-norm");
    }
    theta = cfg.init->normalized();
  } else {
    const double h0 = full_dim_bandwidth(data, cfg.init_h_constant);
    out.initial = ade_initial_estimate(data, cfg.loss, h0, cfg.trim,
                                       cfg.kernel, cfg.degeneracy_ratio,
                                       cfg.solver);
    theta = out.initial->theta;
  }

  // The bandwidth is fixed once from the starting direction.
  QmaveConfig fixed = cfg;
  fixed.h = resolve_bandwidth(data, theta, cfg);
  out.bandwidth = *fixed.h;

  std::size_t iteration = 0;
  try {
    std::vector<AnchorFit> fits = inner_step(data, theta, fixed);
    out.theta_trace.push_back(theta);
    out.objective_trace.push_back(joint_objective(data, theta, fits, fixed));
    for (iteration = 1; iteration <= cfg.max_iter; ++iteration) {
      Eigen::VectorXd next = outer_step(data, theta, fits, fixed);
      const double step = estimation_error(next, theta);
      theta = std::move(next);
      fits = inner_step(data, theta, fixed);
      out.theta_trace.push_back(theta);
      out.objective_trace.push_back(joint_objective(data, theta, fits, fixed));
      out.iterations = iteration;
      if (step <= cfg.tol) {
        out.converged = true;
        break;
      }
    }
  } catch (const InsufficientDataError& e) {
    rethrow_with(e, iteration);
  } catch (const DegenerateProblemError& e) {
    rethrow_with(e, iteration);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("iteration " + std::to_string(iteration) + ": " +
                               e.what(),
                           e.best());
  }

  if (out.converged) {
    out.theta = out.theta_trace.back();
  } else {
    const auto best = std::min_element(out.objective_trace.begin(),
                                       out.objective_trace.end());
    out.theta = out.theta_trace[static_cast<std::size_t>(
        best - out.objective_trace.begin())];
  }
  return out;
}

}  // namespace qmave
