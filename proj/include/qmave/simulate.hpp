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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmave/local_fit.hpp"
#include "qmave/qmave.hpp"

namespace qmave {

/// Counter-based generator: draw k of stream `key` depends only on (key, k).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box-Muller on uniforms 2k and 2k+1.
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Order-sensitive hash of a sequence of 64-bit words (splitmix finalizer).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

enum class NoiseLaw { kScaledT1, kCenteredQuarticNormal, kScaledT5, kScaledNormal };

/// Short names used by the CLI and reports: t1, quartic, t5, normal.
std::string_view to_string(NoiseLaw law);
std::optional<NoiseLaw> parse_noise_law(std::string_view name);
/// Table-style label, e.g. "0.05t(1)".
std::string_view noise_label(NoiseLaw law);

/// (1, 2, 0, 0, 2) / 3.
Eigen::VectorXd default_theta0();

struct SimConfig {
  std::size_t n = 200;
  Eigen::VectorXd theta0 = default_theta0();
  NoiseLaw noise = NoiseLaw::kScaledNormal;
  std::uint64_t seed = 0;
  /// Multiplies the noise draws; 0 gives the noiseless model.
  double noise_scale = 1.0;
};

/// n x 5 rows of N(0, Sigma0) with Sigma0_ij = 0.5^|i-j|.
Eigen::MatrixXd gen_design(std::size_t n, std::uint64_t seed);

Eigen::VectorXd gen_noise(NoiseLaw law, std::size_t n, std::uint64_t seed);

/// Y = exp(-5 (theta0'X)^2) + noise.
std::pair<Dataset, Eigen::VectorXd> gen_model8(const SimConfig& cfg);

/// FNV-1a over the bit patterns of X and Y.
std::uint64_t dataset_fingerprint(const Dataset& data);

enum class Method { kMave, kQmave };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct BenchmarkSpec {
  std::vector<std::size_t> ns{100, 200};
  std::vector<NoiseLaw> laws{NoiseLaw::kScaledT1,
                             NoiseLaw::kCenteredQuarticNormal,
                             NoiseLaw::kScaledT5, NoiseLaw::kScaledNormal};
  std::vector<Method> methods{Method::kMave, Method::kQmave};
  std::size_t replications = 100;
  std::uint64_t base_seed = 20260101;
  Eigen::VectorXd theta0 = default_theta0();
  /// Shared estimator settings; the loss is overridden per method.
  QmaveConfig fit;
  /// Worker threads; 0 means hardware concurrency.
  std::size_t threads = 1;
};

struct BenchmarkRow {
  std::size_t n = 0;
  Method method = Method::kQmave;
  NoiseLaw noise = NoiseLaw::kScaledNormal;
  double mean_error = 0.0;
  double sd_error = 0.0;
  std::size_t replications = 0;
  std::size_t excluded = 0;
  /// More than 10% of the replications failed.
  bool flagged = false;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;

  const BenchmarkRow* find(std::size_t n, Method m, NoiseLaw law) const;
  std::string to_csv() const;
  std::string to_json() const;
};

/// Seed of replication `rep` for sample size n and noise law `law`.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t n,
                               NoiseLaw law, std::size_t rep);

BenchmarkReport run_benchmark(const BenchmarkSpec& spec);

}  // namespace qmave
