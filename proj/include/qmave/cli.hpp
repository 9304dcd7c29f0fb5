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
#include <vector>

#include "qmave/local_fit.hpp"
#include "qmave/simulate.hpp"

namespace qmave {

/// Malformed input file: bad cell, ragged row, missing column.
class ParseError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

/// Reads a headed numeric CSV. `y_column` names the response column, or
/// gives its 0-based position when no header matches and it is all digits.
/// Remaining columns become X in header order; their names are stored in
/// `x_names` when non-null.
Dataset parse_dataset_csv(const std::string& path, const std::string& y_column,
                          std::vector<std::string>* x_names = nullptr);

enum class Subcommand { kFit, kSimulate, kBenchmark };
enum class ReportFormat { kCsv, kJson };

struct CliConfig {
  Subcommand subcommand = Subcommand::kFit;
  std::string input_path;
  std::string output_path;
  std::string y_column = "y";
  double tau = 0.5;
  bool squared_loss = false;
  std::optional<double> h;  // nullopt = auto
  double trim_alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t replications = 100;
  /// nullopt: csv when output_path ends in ".csv", json otherwise.
  std::optional<ReportFormat> format;
  // simulate
  std::size_t n = 200;
  NoiseLaw noise = NoiseLaw::kScaledNormal;
  // benchmark
  std::vector<std::size_t> ns{100, 200};
  std::vector<NoiseLaw> noises{NoiseLaw::kScaledT1,
                               NoiseLaw::kCenteredQuarticNormal,
                               NoiseLaw::kScaledT5, NoiseLaw::kScaledNormal};
  std::size_t threads = 1;
};

/// Throws InvalidInputError describing the first violated constraint.
void validate(const CliConfig& cfg);

/// Runs one subcommand and writes its report. Returns 0 on success, 2 on a
/// usage error, 1 on any other failure; failures print one diagnostic line
/// to stderr.
int run_cli(const CliConfig& cfg);

/// Path of the JSON sidecar written next to simulated data.
std::string sidecar_path(const std::string& data_path);

}  // namespace qmave
