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

#include "qmave/qr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace qmave {
namespace {

struct CompactProblem {
  Eigen::MatrixXd z;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

void validate(const WeightedRegressionProblem& problem) {
  const auto n = problem.design.rows();
  const auto p = problem.design.cols();
  if (n < 1 || p < 1) {
    throw InvalidInputError("regression problem needs n >= 1 and p >= 1");
  }
  if (problem.response.size() != n || problem.weights.size() != n) {
    throw InvalidInputError("design, response and weights disagree in length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = problem.weights[i];
    if (!std::isfinite(wi) || wi < 0.0) {
      throw InvalidInputError("weight " + std::to_string(i) +
                              " is negative or non-finite");
    }
  }
  if (!problem.design.allFinite() || !problem.response.allFinite()) {
    throw InvalidInputError("design or response contains non-finite values");
  }
}

// Rows with zero weight never touch the objective; dropping them up front
// makes the solve identical with or without them.
CompactProblem compact(const WeightedRegressionProblem& problem) {
  const auto n = problem.design.rows();
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (problem.weights[i] > 0.0) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  CompactProblem out{Eigen::MatrixXd(m, problem.design.cols()),
                     Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = keep[static_cast<std::size_t>(k)];
    out.z.row(k) = problem.design.row(i);
    out.y[k] = problem.response[i];
    out.w[k] = problem.weights[i];
  }
  return out;
}

double check_objective(const CompactProblem& cp, double tau,
                       const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = cp.y - cp.z * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double v = r[i];
    total += cp.w[i] * (v > 0.0 ? tau * v : (tau - 1.0) * v);
  }
  return total;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& gram,
                            const Eigen::VectorXd& rhs, double floor) {
  const double max_diag = gram.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) {
    throw DegenerateProblemError("weighted cross-product matrix is zero");
  }
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += floor * max_diag;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw DegenerateProblemError("normal equations could not be factored");
  }
  Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite()) {
    throw DegenerateProblemError("normal equations are rank deficient");
  }
  return beta;
}

Eigen::VectorXd least_squares(const CompactProblem& cp, double floor) {
  const Eigen::MatrixXd wz = cp.z.array().colwise() * cp.w.array();
  const Eigen::MatrixXd gram = cp.z.transpose() * wz;
  const Eigen::VectorXd rhs = wz.transpose() * cp.y;
  return ridge_solve(gram, rhs, floor);
}

// Majorize-minimize on the check loss with its kink replaced by a quadratic
// on [-delta, delta]. Each delta level runs a few reweighted solves, then
// delta shrinks by two decades, ending at 1e-8 of the initial residual scale.
Eigen::VectorXd smoothed_path(const CompactProblem& cp, double tau,
                              double floor) {
  Eigen::VectorXd beta = least_squares(cp, floor);
  Eigen::VectorXd r = cp.y - cp.z * beta;
  const double wsum = cp.w.sum();
  const double delta0 = (cp.w.array() * r.array().abs()).sum() / wsum;
  if (!(delta0 > 0.0)) return beta;

  const Eigen::VectorXd lin = cp.z.transpose() * cp.w * (tau - 0.5);
  constexpr int kLevels = 5;
  constexpr int kItersPerLevel = 4;
  double delta = delta0;
  for (int level = 0; level < kLevels; ++level, delta *= 0.01) {
    for (int it = 0; it < kItersPerLevel; ++it) {
      const Eigen::VectorXd v =
          (cp.w.array() / (2.0 * r.array().abs().max(delta))).matrix();
      const Eigen::MatrixXd vz = cp.z.array().colwise() * v.array();
      const Eigen::MatrixXd gram = cp.z.transpose() * vz;
      const Eigen::VectorXd rhs = vz.transpose() * cp.y + lin;
      Eigen::VectorXd next = ridge_solve(gram, rhs, floor);
      const double step = (next - beta).norm();
      beta = std::move(next);
      r = cp.y - cp.z * beta;
      if (step <= 1e-10 * (1.0 + beta.norm())) break;
    }
  }
  return beta;
}

// Picks p rows with the smallest absolute residuals whose design rows are
// linearly independent (greedy Gram-Schmidt).
std::vector<Eigen::Index> initial_basis(const CompactProblem& cp,
                                        const Eigen::VectorXd& r) {
  const auto n = cp.z.rows();
  const auto p = cp.z.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto closer = [&](Eigen::Index a, Eigen::Index b) {
    const double ra = std::abs(r[a]), rb = std::abs(r[b]);
    return ra < rb || (ra == rb && a < b);
  };
  // Usually the first few candidates suffice; sort everything only if not.
  const auto head = std::min<std::size_t>(order.size(),
                                          static_cast<std::size_t>(8 * p));
  std::partial_sort(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(head),
                    order.end(), closer);
  std::vector<Eigen::Index> basis;
  Eigen::MatrixXd q(p, p);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (pos == head) {
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(head), order.end(),
                closer);
    }
    const auto i = order[pos];
    Eigen::VectorXd v = cp.z.row(i).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      v -= q.col(col).dot(v) * q.col(col);
    }
    const double norm = v.norm();
    if (norm <= 1e-9 * norm0) continue;
    q.col(static_cast<Eigen::Index>(basis.size())) = v / norm;
    basis.push_back(i);
    if (static_cast<Eigen::Index>(basis.size()) == p) break;
  }
  if (static_cast<Eigen::Index>(basis.size()) < p) {
    throw DegenerateProblemError("design does not have full column rank");
  }
  return basis;
}

struct Vertex {
  Eigen::VectorXd beta;
  Eigen::MatrixXd inverse;  // inverse of the basis rows of the design
};

Vertex solve_vertex(const CompactProblem& cp,
                    const std::vector<Eigen::Index>& basis) {
  const auto p = cp.z.cols();
  Eigen::MatrixXd zb(p, p);
  Eigen::VectorXd yb(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    zb.row(k) = cp.z.row(basis[static_cast<std::size_t>(k)]);
    yb[k] = cp.y[basis[static_cast<std::size_t>(k)]];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(zb);
  if (!lu.isInvertible()) {
    throw DegenerateProblemError("basis rows are singular");
  }
  return {lu.solve(yb), lu.inverse()};
}

struct Kink {
  double t;
  double jump;
  Eigen::Index row;
};

bool kink_before(const Kink& x, const Kink& y) {
  return x.t < y.t || (x.t == y.t && x.row < y.row);
}

// Row of the first breakpoint, in (t, row) order, at which the accumulated
// slope jumps reach `need`; -1 if they never do. Weighted quickselect, so
// linear in the number of kinks on average.
Eigen::Index first_kink_reaching(std::vector<Kink>& kinks, double need) {
  std::size_t lo = 0, hi = kinks.size();
  double acc = 0.0;
  while (hi - lo > 32) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(kinks.begin() + static_cast<std::ptrdiff_t>(lo),
                     kinks.begin() + static_cast<std::ptrdiff_t>(mid),
                     kinks.begin() + static_cast<std::ptrdiff_t>(hi),
                     kink_before);
    double left = 0.0;
    for (std::size_t k = lo; k <= mid; ++k) left += kinks[k].jump;
    if (acc + left >= need) {
      hi = mid + 1;
    } else {
      acc += left;
      lo = mid + 1;
    }
  }
  std::sort(kinks.begin() + static_cast<std::ptrdiff_t>(lo),
            kinks.begin() + static_cast<std::ptrdiff_t>(hi), kink_before);
  for (std::size_t k = lo; k < hi; ++k) {
    acc += kinks[k].jump;
    if (acc >= need) return kinks[k].row;
  }
  return -1;
}

// Exact descent over vertices of the piecewise-linear objective. At a vertex
// every edge is obtained by releasing one basis row in one of two
// directions; the steepest descending edge is followed with an exact line
// search (a weighted-median walk over the residual breakpoints).
Eigen::VectorXd vertex_descent(const CompactProblem& cp, double tau,
                               const Eigen::VectorXd& start,
                               const SolverOptions& opts) {
  const auto n = cp.z.rows();
  const auto p = cp.z.cols();
  std::vector<Eigen::Index> basis =
      initial_basis(cp, cp.y - cp.z * start);
  Vertex vx = solve_vertex(cp, basis);
  double f = check_objective(cp, tau, vx.beta);
  Eigen::VectorXd best = vx.beta;
  double best_f = f;

  const double yscale = 1.0 + cp.y.cwiseAbs().maxCoeff();
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  std::vector<Kink> kinks;
  kinks.reserve(static_cast<std::size_t>(n));

  for (std::size_t pivot = 0; pivot <= opts.max_iterations; ++pivot) {
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (auto i : basis) in_basis[static_cast<std::size_t>(i)] = 1;

    Eigen::VectorXd r = cp.y - cp.z * vx.beta;
    const double eps = 1e-12 * (yscale + r.cwiseAbs().maxCoeff());
    for (auto i : basis) r[i] = 0.0;
    const Eigen::MatrixXd dirs = cp.z * vx.inverse;  // n x p

    // Directional derivative of the objective along each edge.
    double best_slope = 0.0;
    Eigen::Index best_l = -1;
    double best_sign = 1.0;
    for (Eigen::Index l = 0; l < p; ++l) {
      const auto released = basis[static_cast<std::size_t>(l)];
      double up = 0.0, down = 0.0, mass = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double a;
        if (in_basis[static_cast<std::size_t>(i)]) {
          a = i == released ? 1.0 : 0.0;
        } else {
          a = dirs(i, l);
        }
        if (a == 0.0) continue;
        const double wi = cp.w[i];
        mass += wi * std::abs(a);
        const double ri = r[i];
        if (std::abs(ri) <= eps) {
          up += wi * (a > 0.0 ? (1.0 - tau) * a : -tau * a);
          down += wi * (a < 0.0 ? -(1.0 - tau) * a : tau * a);
        } else if (ri > 0.0) {
          up -= wi * tau * a;
          down += wi * tau * a;
        } else {
          up += wi * (1.0 - tau) * a;
          down -= wi * (1.0 - tau) * a;
        }
      }
      const double len = vx.inverse.col(l).norm();
      const double tol = 1e-13 * mass;
      if (up < -tol && up / len < best_slope) {
        best_slope = up / len;
        best_l = l;
        best_sign = 1.0;
      }
      if (down < -tol && down / len < best_slope) {
        best_slope = down / len;
        best_l = l;
        best_sign = -1.0;
      }
    }
    if (best_l < 0) return best;
    if (pivot == opts.max_iterations) break;

    const auto released = basis[static_cast<std::size_t>(best_l)];
    double slope = 0.0;
    kinks.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      double a;
      if (in_basis[static_cast<std::size_t>(i)]) {
        a = i == released ? best_sign : 0.0;
      } else {
        a = best_sign * dirs(i, best_l);
      }
      if (a == 0.0) continue;
      const double wi = cp.w[i];
      const double ri = r[i];
      if (std::abs(ri) <= eps) {
        slope += wi * (a > 0.0 ? (1.0 - tau) * a : -tau * a);
        continue;
      }
      slope += ri > 0.0 ? -wi * tau * a : wi * (1.0 - tau) * a;
      const double t = ri / a;
      if (t > 0.0) kinks.push_back({t, wi * std::abs(a), i});
    }
    const Eigen::Index entering = first_kink_reaching(kinks, -slope);
    if (entering < 0) {
      throw DegenerateProblemError("check-loss objective is unbounded below");
    }

    std::vector<Eigen::Index> next_basis = basis;
    next_basis[static_cast<std::size_t>(best_l)] = entering;
    Vertex next = solve_vertex(cp, next_basis);
    const double next_f = check_objective(cp, tau, next.beta);
    if (!(next_f < f)) return best;  // no strict progress left
    basis = std::move(next_basis);
    vx = std::move(next);
    f = next_f;
    if (f < best_f) {
      best_f = f;
      best = vx.beta;
    }
  }
  throw ConvergenceError("quantile regression did not reach an optimal vertex "
                         "within " + std::to_string(opts.max_iterations) +
                             " pivots",
                         best);
}

}  // namespace

double regression_objective(const WeightedRegressionProblem& problem,
                            const Eigen::Ref<const Eigen::VectorXd>& beta) {
  const Eigen::VectorXd r = problem.response - problem.design * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (problem.weights[i] == 0.0) continue;
    total += problem.weights[i] * check_loss(r[i], problem.loss);
  }
  return total;
}

Eigen::VectorXd solve_weighted_qr(const WeightedRegressionProblem& problem,
                                  const SolverOptions& opts) {
  validate(problem);
  if (!problem.loss.is_quantile()) {
    throw InvalidInputError("solve_weighted_qr requires a quantile loss");
  }
  const CompactProblem cp = compact(problem);
  const auto p = problem.design.cols();
  if (cp.z.rows() < p) {
    throw DegenerateProblemError(
        "quantile regression needs at least " + std::to_string(p) +
        " positively weighted rows, got " + std::to_string(cp.z.rows()));
  }
  const double tau = problem.loss.tau();
  const Eigen::VectorXd smooth =
      smoothed_path(cp, tau, opts.regularization_floor);
  Eigen::VectorXd exact = vertex_descent(cp, tau, smooth, opts);
  if (check_objective(cp, tau, smooth) < check_objective(cp, tau, exact)) {
    return smooth;
  }
  return exact;
}

Eigen::VectorXd solve_weighted_ls(const WeightedRegressionProblem& problem,
                                  const SolverOptions& opts) {
  validate(problem);
  const CompactProblem cp = compact(problem);
  if (cp.z.rows() == 0) {
    throw DegenerateProblemError("no positively weighted rows");
  }
  return least_squares(cp, opts.regularization_floor);
}

Eigen::VectorXd solve_weighted(const WeightedRegressionProblem& problem,
                               const SolverOptions& opts) {
  return problem.loss.is_quantile() ? solve_weighted_qr(problem, opts)
                                    : solve_weighted_ls(problem, opts);
}

Eigen::VectorXd qr_oracle(const WeightedRegressionProblem& problem) {
  validate(problem);
  if (!problem.loss.is_quantile()) {
    throw InvalidInputError("qr_oracle requires a quantile loss");
  }
  const auto p = problem.design.cols();
  if (problem.design.rows() > 15 || p > 4) {
    throw InvalidInputError("qr_oracle is limited to n <= 15 and p <= 4");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < problem.design.rows(); ++i) {
    if (problem.weights[i] > 0.0) rows.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  if (m < p) throw DegenerateProblemError("fewer than p weighted rows");

  // Walk all p-subsets of the weighted rows in lexicographic order.
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(p));
  std::iota(pick.begin(), pick.end(), Eigen::Index{0});
  Eigen::VectorXd best;
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd zb(p, p);
  Eigen::VectorXd yb(p);
  while (true) {
    double hadamard = 1.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto i = rows[static_cast<std::size_t>(pick[k])];
      zb.row(k) = problem.design.row(i);
      yb[k] = problem.response[i];
      hadamard *= std::max(zb.row(k).norm(), 1e-300);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(zb);
    if (std::abs(lu.determinant()) > 1e-12 * hadamard) {
      const Eigen::VectorXd cand = lu.solve(yb);
      const double f = regression_objective(problem, cand);
      if (f < best_f) {
        best_f = f;
        best = cand;
      }
    }
    Eigen::Index k = p - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - p + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < p; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (best.size() == 0) {
    throw DegenerateProblemError("every candidate basis is singular");
  }
  return best;
}

}  // namespace qmave
