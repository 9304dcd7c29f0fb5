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

#include "qmave/numeric_core.hpp"

#include <cmath>
#include <string>

#include "qmave/error.hpp"

namespace qmave {

LossSpec LossSpec::Quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidInputError("quantile level must lie in (0, 1), got " +
                            std::to_string(tau));
  }
  return LossSpec(Kind::kQuantile, tau);
}

double check_loss(double v, const LossSpec& loss) {
  if (!loss.is_quantile()) return v * v;
  return v > 0.0 ? loss.tau() * v : (loss.tau() - 1.0) * v;
}

double check_subgradient(double v, double tau) {
  return v <= 0.0 ? tau - 1.0 : tau;
}

double kernel_eval(const KernelSpec& k, double u) {
  if (!(std::abs(u) <= 1.0)) return 0.0;
  const double s = 1.0 - u * u;
  switch (k.kind) {
    case KernelKind::kEpanechnikov:
      return 0.75 * s;
    case KernelKind::kQuartic:
      return 15.0 / 16.0 * s * s;
  }
  return 0.0;
}

double default_bandwidth(const BandwidthRule& rule, std::size_t n,
                         double scale) {
  if (n < 2) throw InvalidInputError("bandwidth rule needs n >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidInputError("bandwidth scale must be positive and finite");
  }
  if (!(rule.constant > 0.0)) {
    throw InvalidInputError("bandwidth constant must be positive");
  }
  const double nd = static_cast<double>(n);
  const double exponent =
      rule.stage == BandwidthRule::Stage::kIndex
          ? 1.0 / 5.0
          : 1.0 / (static_cast<double>(rule.dim) + 4.0);
  return rule.constant * scale * std::pow(std::log(nd) / nd, exponent);
}

}  // namespace qmave
