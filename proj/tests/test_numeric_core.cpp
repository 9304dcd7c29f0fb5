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

#include "qmave/error.hpp"
#include "qmave/numeric_core.hpp"

using namespace qmave;

TEST_CASE("check loss evaluates the pinball and squared losses") {
  CHECK(check_loss(2.0, LossSpec::Quantile(0.5)) == doctest::Approx(1.0));
  CHECK(check_loss(-4.0, LossSpec::Quantile(0.25)) == doctest::Approx(3.0));
  CHECK(check_loss(0.0, LossSpec::Quantile(0.3)) == 0.0);
  CHECK(check_loss(0.0, LossSpec::Squared()) == 0.0);
  CHECK(check_loss(-3.0, LossSpec::Squared()) == 9.0);
}

TEST_CASE("quantile level must be strictly inside (0, 1)") {
  CHECK_THROWS_AS(LossSpec::Quantile(0.0), InvalidInputError);
  CHECK_THROWS_AS(LossSpec::Quantile(1.0), InvalidInputError);
  CHECK_THROWS_AS(LossSpec::Quantile(-0.2), InvalidInputError);
  CHECK_THROWS_AS(LossSpec::Quantile(std::nan("")), InvalidInputError);
  CHECK(LossSpec::Quantile(0.9).tau() == 0.9);
}

TEST_CASE("check subgradient branches") {
  CHECK(check_subgradient(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(check_subgradient(-3.0, 0.9) == doctest::Approx(-0.1));
  CHECK(check_subgradient(0.0, 0.5) == doctest::Approx(-0.5));
}

TEST_CASE("kernel values") {
  const KernelSpec epa{KernelKind::kEpanechnikov};
  const KernelSpec quartic{KernelKind::kQuartic};
  CHECK(kernel_eval(epa, 0.0) == doctest::Approx(0.75));
  CHECK(kernel_eval(epa, 1.2) == 0.0);
  CHECK(kernel_eval(epa, -1.0) == 0.0);
  CHECK(kernel_eval(quartic, 0.0) == doctest::Approx(15.0 / 16.0));
  CHECK(kernel_eval(quartic, 0.37) == kernel_eval(quartic, -0.37));
}

TEST_CASE("default bandwidth follows the stated rates") {
  // (log 200 / 200)^(1/5) and ^(1/9), (log 2 / 2)^(1/5), from the formula.
  CHECK(default_bandwidth(BandwidthRule::Index(), 200, 1.0) ==
        doctest::Approx(0.483750686807854).epsilon(1e-12));
  CHECK(default_bandwidth(BandwidthRule::FullDim(5), 200, 1.0) ==
        doctest::Approx(0.668020476339904).epsilon(1e-12));
  CHECK(default_bandwidth(BandwidthRule::Index(), 2, 1.0) ==
        doctest::Approx(0.809019692671192).epsilon(1e-12));
  CHECK(default_bandwidth(BandwidthRule::Index(2.0), 200, 3.0) ==
        doctest::Approx(6.0 * 0.483750686807854));
  CHECK_THROWS_AS(default_bandwidth(BandwidthRule::Index(), 1, 1.0),
                  InvalidInputError);
  CHECK_THROWS_AS(default_bandwidth(BandwidthRule::Index(), 10, 0.0),
                  InvalidInputError);
}

TEST_CASE("property: check loss is convex, nonnegative, zero only at zero") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(-50.0, 50.0), t(0.0, 1.0),
      tau(0.01, 0.99);
  for (int k = 0; k < 5000; ++k) {
    const LossSpec loss = LossSpec::Quantile(tau(rng));
    const double a = v(rng), b = v(rng), s = t(rng);
    const double lhs = check_loss(s * a + (1 - s) * b, loss);
    const double rhs = s * check_loss(a, loss) + (1 - s) * check_loss(b, loss);
    CHECK(lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs)));
    CHECK(check_loss(a, loss) > 0.0);
  }
}

TEST_CASE("property: subgradient matches the finite-difference derivative") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> v(-10.0, 10.0), tau(0.01, 0.99);
  constexpr double kStep = 1e-7;
  for (int k = 0; k < 2000; ++k) {
    const double t = tau(rng);
    double x = v(rng);
    if (std::abs(x) < 10 * kStep) x = 1.0;
    const LossSpec loss = LossSpec::Quantile(t);
    const double fd =
        (check_loss(x + kStep, loss) - check_loss(x - kStep, loss)) / (2 * kStep);
    CHECK(std::abs(fd - check_subgradient(x, t)) <= 1e-5);
  }
}

namespace {

// Composite Simpson on [-1, 1]; the kernels are polynomials there, so the
// rule is exact up to rounding.
double integrate(const KernelSpec& k, int pieces = 2000) {
  const double h = 2.0 / pieces;
  double s = kernel_eval(k, -1.0) + kernel_eval(k, 1.0);
  for (int i = 1; i < pieces; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * kernel_eval(k, -1.0 + i * h);
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("property: kernels are symmetric densities with Lipschitz moments") {
  for (auto kind : {KernelKind::kEpanechnikov, KernelKind::kQuartic}) {
    const KernelSpec k{kind};
    CHECK(std::abs(integrate(k) - 1.0) <= 1e-10);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
      const double x = u(rng);
      CHECK(kernel_eval(k, x) == kernel_eval(k, -x));
      if (std::abs(x) > 1.0) CHECK(kernel_eval(k, x) == 0.0);
      CHECK(kernel_eval(k, x) >= 0.0);
    }
    // |u^j K(u) - v^j K(v)| <= C |u - v| on a fine grid spanning the support
    // edge; the difference quotient stays bounded.
    for (int j = 0; j <= 3; ++j) {
      double worst = 0.0;
      for (int i = 0; i < 4000; ++i) {
        const double a = -1.5 + 3.0 * i / 4000.0, b = a + 1e-6;
        const double fa = std::pow(a, j) * kernel_eval(k, a);
        const double fb = std::pow(b, j) * kernel_eval(k, b);
        worst = std::max(worst, std::abs(fb - fa) / 1e-6);
      }
      CHECK(worst < 5.0);
    }
  }
}

TEST_CASE("property: default bandwidth decreases in n for n >= 3") {
  for (auto rule : {BandwidthRule::Index(), BandwidthRule::FullDim(5),
                    BandwidthRule::FullDim(2, 0.7)}) {
    double prev = default_bandwidth(rule, 3, 1.3);
    for (std::size_t n = 4; n < 5000; n += (n < 100 ? 1 : 37)) {
      const double h = default_bandwidth(rule, n, 1.3);
      CHECK(h > 0.0);
      CHECK(h < prev);
      prev = h;
    }
  }
}
