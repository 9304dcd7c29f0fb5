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

#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qmave/error.hpp"
#include "qmave/local_fit.hpp"

using namespace qmave;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < d; ++l) x(i, l) = g(rng);
  return x;
}

Eigen::VectorXd unit(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out.normalized();
}

double epanechnikov(double u) { return std::abs(u) < 1.0 ? 0.75 * (1 - u * u) : 0.0; }

// Kernel-weighted problem of an index fit, built independently of the
// library's windowing.
WeightedRegressionProblem induced_index_problem(const Dataset& data,
                                                const Eigen::VectorXd& theta,
                                                const Eigen::VectorXd& x0,
                                                double h, double tau) {
  const auto n = data.n();
  WeightedRegressionProblem p{Eigen::MatrixXd(n, 2), data.y(), Eigen::VectorXd(n),
                              LossSpec::Quantile(tau)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = theta.dot(data.x().row(i).transpose() - x0);
    p.design(i, 0) = 1.0;
    p.design(i, 1) = u;
    p.weights[i] = epanechnikov(u / h);
  }
  return p;
}

}  // namespace

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(3, 5), Eigen::VectorXd::Zero(3)),
                  InsufficientDataError);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(10, 0), Eigen::VectorXd::Zero(10)),
                  InvalidInputError);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 2);
  x(2, 1) = std::nan("");
  CHECK_THROWS_AS(Dataset(x, Eigen::VectorXd::Zero(6)), InvalidInputError);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(6, 2), Eigen::VectorXd::Zero(5)),
                  InvalidInputError);
  CHECK(Dataset(Eigen::MatrixXd::Zero(6, 2), Eigen::VectorXd::Zero(6)).n() == 6);
}

TEST_CASE("index fit interpolates exact linear data") {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd theta = unit({1, -2, 0.5});
  const Eigen::MatrixXd x = gaussian(rng, 60, 3);
  const Dataset data(x, x * theta);
  const Eigen::VectorXd x0 = x.row(7).transpose();
  for (auto loss : {LossSpec::Quantile(0.5), LossSpec::Squared()}) {
    const LocalFit f = local_linear_index_fit(data, theta, x0, 0.8, loss, {});
    CHECK(std::abs(f.a - theta.dot(x0)) <= 1e-8);
    CHECK(std::abs(f.b[0] - 1.0) <= 1e-8);
    CHECK(f.effective_weight > 0.0);
  }
}

TEST_CASE("index fit of a constant response is flat") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = gaussian(rng, 40, 2);
  const Dataset data(x, Eigen::VectorXd::Constant(40, 3.25));
  const LocalFit f = local_linear_index_fit(data, unit({1, 1}), x.row(0).transpose(),
                                            1.0, LossSpec::Quantile(0.3), {});
  CHECK(std::abs(f.a - 3.25) <= 1e-8);
  CHECK(std::abs(f.b[0]) <= 1e-8);
}

TEST_CASE("index fit agrees with the enumeration oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd x = gaussian(rng, 10, 2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = std::sin(x(i, 0)) + 0.3 * g(rng);
    const Dataset data(x, y);
    const Eigen::VectorXd theta = unit({0.6, 0.8});
    const Eigen::VectorXd x0 = x.row(rep % 10).transpose();
    const double tau = rep % 2 ? 0.5 : 0.25;
    const auto prob = induced_index_problem(data, theta, x0, 2.0, tau);
    const LocalFit f =
        local_linear_index_fit(data, theta, x0, 2.0, LossSpec::Quantile(tau), {});
    Eigen::VectorXd beta(2);
    beta << f.a, f.b[0];
    const double f_oracle = regression_objective(prob, qr_oracle(prob));
    CHECK(std::abs(regression_objective(prob, beta) - f_oracle) <=
          1e-8 * (1.0 + f_oracle));
  }
}

TEST_CASE("index fit with a single distinct index value is rejected") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(8, 2);
  for (int i = 0; i < 8; ++i) x(i, 0) = i < 4 ? 0.0 : 10.0 + i;
  const Dataset data(x, Eigen::VectorXd::LinSpaced(8, 0, 1));
  CHECK_THROWS_AS(local_linear_index_fit(data, unit({1, 0}), Eigen::Vector2d(0, 0),
                                         0.5, LossSpec::Quantile(0.5), {}),
                  InsufficientDataError);
  CHECK_THROWS_AS(local_linear_index_fit(data, unit({1, 0}), Eigen::Vector2d(0, 0),
                                         0.0, LossSpec::Quantile(0.5), {}),
                  InvalidInputError);
}

TEST_CASE("full fit interpolates exact affine data") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = gaussian(rng, 80, 3);
  Eigen::VectorXd beta_star(3);
  beta_star << 0.4, -1.1, 2.0;
  const Dataset data(x, (x * beta_star).array() + 5.0);
  const Eigen::VectorXd x0 = x.row(3).transpose();
  for (auto loss : {LossSpec::Quantile(0.5), LossSpec::Squared()}) {
    const LocalFit f = local_linear_full_fit(data, x0, 1.5, loss, {});
    CHECK(std::abs(f.a - (beta_star.dot(x0) + 5.0)) <= 1e-8);
    CHECK((f.b - beta_star).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("full fit with an empty window is rejected") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = gaussian(rng, 30, 2);
  const Dataset data(x, x.col(0));
  CHECK_THROWS_AS(local_linear_full_fit(data, Eigen::Vector2d(100, 100), 0.5,
                                        LossSpec::Quantile(0.5), {}),
                  InsufficientDataError);
}

TEST_CASE("full fit agrees with the enumeration oracle (p = 3)") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd x = gaussian(rng, 12, 2);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y[i] = x(i, 0) * x(i, 1) + 0.5 * g(rng);
    const Dataset data(x, y);
    const Eigen::VectorXd x0 = Eigen::Vector2d(0.1, -0.2);
    const double h0 = 3.0;
    WeightedRegressionProblem prob{Eigen::MatrixXd(12, 3), y, Eigen::VectorXd(12),
                                   LossSpec::Quantile(0.5)};
    for (int i = 0; i < 12; ++i) {
      prob.design(i, 0) = 1.0;
      prob.design(i, 1) = x(i, 0) - x0[0];
      prob.design(i, 2) = x(i, 1) - x0[1];
      prob.weights[i] = epanechnikov(prob.design(i, 1) / h0) *
                        epanechnikov(prob.design(i, 2) / h0);
    }
    const LocalFit f = local_linear_full_fit(data, x0, h0, LossSpec::Quantile(0.5), {});
    Eigen::VectorXd beta(3);
    beta << f.a, f.b;
    const double f_oracle = regression_objective(prob, qr_oracle(prob));
    CHECK(std::abs(regression_objective(prob, beta) - f_oracle) <=
          1e-8 * (1.0 + f_oracle));
  }
}

TEST_CASE("property: shifting Y shifts the level and keeps the slope") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> shift(-20.0, 20.0);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = gaussian(rng, 50, 2);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y[i] = std::exp(-x(i, 0) * x(i, 0)) + 0.2 * g(rng);
    const double c = shift(rng);
    const Dataset base(x, y), moved(x, y.array() + c);
    const Eigen::VectorXd theta = unit({1, 0.5});
    const Eigen::VectorXd x0 = x.row(rep).transpose();
    const LossSpec loss = LossSpec::Quantile(0.5);
    const LocalFit f0 = local_linear_index_fit(base, theta, x0, 1.2, loss, {});
    const LocalFit f1 = local_linear_index_fit(moved, theta, x0, 1.2, loss, {});
    // Objective level: the shifted fit is optimal for the shifted problem
    // and maps back to an optimum of the original.
    auto prob0 = induced_index_problem(base, theta, x0, 1.2, 0.5);
    Eigen::VectorXd b0(2), b1(2);
    b0 << f0.a, f0.b[0];
    b1 << f1.a - c, f1.b[0];
    const double o0 = regression_objective(prob0, b0);
    CHECK(std::abs(regression_objective(prob0, b1) - o0) <= 1e-8 * (1.0 + o0));
  }
}

TEST_CASE("property: reversing the index negates the slope") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = gaussian(rng, 50, 3);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y[i] = x(i, 1) + 0.3 * g(rng);
    const Dataset data(x, y);
    const Eigen::VectorXd theta = unit({0.2, 1, -0.3});
    const Eigen::VectorXd x0 = x.row(rep).transpose();
    const LossSpec loss = LossSpec::Quantile(0.75);
    const LocalFit pos = local_linear_index_fit(data, theta, x0, 1.0, loss, {});
    const LocalFit neg = local_linear_index_fit(data, -theta, x0, 1.0, loss, {});
    auto prob = induced_index_problem(data, theta, x0, 1.0, 0.75);
    Eigen::VectorXd bp(2), bn(2);
    bp << pos.a, pos.b[0];
    bn << neg.a, -neg.b[0];
    const double op = regression_objective(prob, bp);
    CHECK(std::abs(regression_objective(prob, bn) - op) <= 1e-8 * (1.0 + op));
  }
}

TEST_CASE("property: observations outside the window have no influence") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = gaussian(rng, 60, 2);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y[i] = x(i, 0) - x(i, 1) + g(rng);
    const Dataset data(x, y);
    const Eigen::VectorXd theta = unit({1, -1});
    const Eigen::VectorXd x0 = x.row(rep).transpose();
    const double h = 0.7;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < 60; ++i) {
      if (std::abs(theta.dot(x.row(i).transpose() - x0)) <= h) keep.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd xs(m, 2);
    Eigen::VectorXd ys(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      xs.row(r) = x.row(keep[static_cast<std::size_t>(r)]);
      ys[r] = y[keep[static_cast<std::size_t>(r)]];
    }
    if (m < 6) continue;
    const LossSpec loss = LossSpec::Quantile(0.5);
    const LocalFit full = local_linear_index_fit(data, theta, x0, h, loss, {});
    const LocalFit part = local_linear_index_fit(Dataset(xs, ys), theta, x0, h, loss, {});
    CHECK(full.a == part.a);
    CHECK(full.b[0] == part.b[0]);
    CHECK(full.effective_weight == part.effective_weight);
  }
}
