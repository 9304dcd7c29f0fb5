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

namespace qmave {

/// Loss used by every fitting stage: the check (pinball) loss at level tau,
/// or the squared loss of the least-squares baseline.
class LossSpec {
 public:
  enum class Kind { kQuantile, kSquared };

  /// Throws InvalidInputError unless 0 < tau < 1.
  static LossSpec Quantile(double tau);
  static LossSpec Squared() { return LossSpec(Kind::kSquared, 0.0); }

  Kind kind() const { return kind_; }
  bool is_quantile() const { return kind_ == Kind::kQuantile; }
  /// Quantile level; only meaningful for quantile losses.
  double tau() const { return tau_; }

  bool operator==(const LossSpec&) const = default;

 private:
  LossSpec(Kind kind, double tau) : kind_(kind), tau_(tau) {}

  Kind kind_;
  double tau_;
};

/// Symmetric densities supported on [-1, 1].
enum class KernelKind { kEpanechnikov, kQuartic };

struct KernelSpec {
  KernelKind kind = KernelKind::kEpanechnikov;
};

/// Bandwidth rate family. kIndex smooths along a one-dimensional index,
/// kFullDim in all `dim` coordinates at once.
struct BandwidthRule {
  enum class Stage { kIndex, kFullDim };

  double constant = 1.0;
  Stage stage = Stage::kIndex;
  std::size_t dim = 1;

  static BandwidthRule Index(double c = 1.0) { return {c, Stage::kIndex, 1}; }
  static BandwidthRule FullDim(std::size_t d, double c = 1.0) {
    return {c, Stage::kFullDim, d};
  }
};

/// rho_tau(v) = tau*v for v > 0, (tau-1)*v otherwise; v*v for squared loss.
double check_loss(double v, const LossSpec& loss);

/// Subgradient of rho_tau with the convention tau-1 at v == 0.
double check_subgradient(double v, double tau);

double kernel_eval(const KernelSpec& k, double u);

/// c * scale * (log n / n)^(1/5) for the index stage,
/// c * scale * (log n / n)^(1/(d+4)) for the full-dimensional stage.
double default_bandwidth(const BandwidthRule& rule, std::size_t n, double scale);

}  // namespace qmave
