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

#include "qmave/cli.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "qmave/error.hpp"
#include "qmave/qmave.hpp"

namespace qmave {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string fmt(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ReportFormat resolve_format(const CliConfig& cfg) {
  if (cfg.format) return *cfg.format;
  return ends_with(cfg.output_path, ".csv") ? ReportFormat::kCsv
                                            : ReportFormat::kJson;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string fit_report(const IndexFit& fit,
                       const std::vector<std::string>& names,
                       ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json doc;
    doc["columns"] = names;
    doc["theta"] = to_vector(fit.theta);
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["bandwidth"] = fit.bandwidth;
    doc["objective_trace"] = fit.objective_trace;
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const auto& t : fit.theta_trace) trace.push_back(to_vector(t));
    doc["theta_trace"] = std::move(trace);
    if (fit.initial) {
      doc["initial"] = {{"method", to_string(fit.initial->method_used)},
                        {"theta", to_vector(fit.initial->theta)},
                        {"trimmed_count", fit.initial->trimmed_count}};
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "kind,iteration,converged,objective";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < fit.theta_trace.size(); ++k) {
    out << "trace," << k << ",," << fmt(fit.objective_trace[k]);
    for (Eigen::Index l = 0; l < fit.theta_trace[k].size(); ++l) {
      out << ',' << fmt(fit.theta_trace[k][l]);
    }
    out << '\n';
  }
  const auto pos = std::find_if(fit.theta_trace.begin(), fit.theta_trace.end(),
                                [&](const Eigen::VectorXd& t) {
                                  return t == fit.theta;
                                }) -
                   fit.theta_trace.begin();
  out << "final," << fit.iterations << ',' << (fit.converged ? "true" : "false")
      << ',' << fmt(fit.objective_trace[static_cast<std::size_t>(pos)]);
  for (Eigen::Index l = 0; l < fit.theta.size(); ++l) {
    out << ',' << fmt(fit.theta[l]);
  }
  out << '\n';
  return out.str();
}

void run_fit(const CliConfig& cfg) {
  std::vector<std::string> names;
  const Dataset data = parse_dataset_csv(cfg.input_path, cfg.y_column, &names);
  QmaveConfig qcfg;
  qcfg.loss = cfg.squared_loss ? LossSpec::Squared() : LossSpec::Quantile(cfg.tau);
  qcfg.h = cfg.h;
  qcfg.trim.alpha = cfg.trim_alpha;
  const IndexFit fit = qmave_fit(data, qcfg);
  write_file(cfg.output_path, fit_report(fit, names, resolve_format(cfg)));
}

void run_simulate(const CliConfig& cfg) {
  SimConfig sim;
  sim.n = cfg.n;
  sim.noise = cfg.noise;
  sim.seed = cfg.seed;
  const auto [data, theta0] = gen_model8(sim);
  std::ostringstream csv;
  for (Eigen::Index l = 0; l < data.d(); ++l) csv << 'x' << (l + 1) << ',';
  csv << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index l = 0; l < data.d(); ++l) csv << fmt(data.x()(i, l)) << ',';
    csv << fmt(data.y()[i]) << '\n';
  }
  write_file(cfg.output_path, csv.str());

  std::ostringstream hex;
  hex << std::hex << dataset_fingerprint(data);
  nlohmann::ordered_json side;
  side["n"] = sim.n;
  side["noise"] = to_string(sim.noise);
  side["seed"] = sim.seed;
  side["theta0"] = to_vector(theta0);
  side["fingerprint"] = hex.str();
  write_file(sidecar_path(cfg.output_path), side.dump(2) + "\n");
}

void run_bench(const CliConfig& cfg) {
  BenchmarkSpec spec;
  spec.ns = cfg.ns;
  spec.laws = cfg.noises;
  spec.replications = cfg.replications;
  spec.base_seed = cfg.seed;
  spec.threads = cfg.threads;
  spec.fit.h = cfg.h;
  spec.fit.trim.alpha = cfg.trim_alpha;
  const BenchmarkReport report = run_benchmark(spec);
  write_file(cfg.output_path, resolve_format(cfg) == ReportFormat::kCsv
                                  ? report.to_csv()
                                  : report.to_json());
}

}  // namespace

Dataset parse_dataset_csv(const std::string& path, const std::string& y_column,
                          std::vector<std::string>* x_names) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw ParseError("'" + path + "' has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);

  std::size_t y_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == y_column) {
      y_idx = c;
      break;
    }
  }
  if (y_idx == header.size() && !y_column.empty() &&
      std::all_of(y_column.begin(), y_column.end(),
                  [](unsigned char ch) { return std::isdigit(ch); })) {
    const auto pos = std::stoul(y_column);
    if (pos < header.size()) y_idx = pos;
  }
  if (y_idx == header.size()) {
    throw ParseError("missing column '" + y_column + "' in '" + path + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row_no;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(row_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_number(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("non-numeric cell '" + fields[c] + "' at row " +
                         std::to_string(row_no) + ", column '" + header[c] +
                         "'");
      }
      values[c] = *v;
    }
    rows.push_back(std::move(values));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size()) - 1;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index l = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(i)][c];
      if (c == y_idx) {
        y[i] = v;
      } else {
        x(i, l++) = v;
      }
    }
  }
  if (x_names) {
    x_names->clear();
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != y_idx) x_names->push_back(header[c]);
    }
  }
  return Dataset(std::move(x), std::move(y));
}

std::string sidecar_path(const std::string& data_path) {
  return data_path + ".json";
}

void validate(const CliConfig& cfg) {
  if (cfg.output_path.empty()) throw InvalidInputError("--out is required");
  if (cfg.subcommand == Subcommand::kFit && cfg.input_path.empty()) {
    throw InvalidInputError("--input is required for fit");
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw InvalidInputError("--tau must lie strictly between 0 and 1");
  }
  if (cfg.h && !(*cfg.h > 0.0)) {
    throw InvalidInputError("--h must be positive or 'auto'");
  }
  if (!(cfg.trim_alpha >= 0.0 && cfg.trim_alpha < 0.5)) {
    throw InvalidInputError("--trim must lie in [0, 0.5)");
  }
  if (cfg.subcommand == Subcommand::kSimulate && cfg.n < 2) {
    throw InvalidInputError("--n must be at least 2");
  }
  if (cfg.subcommand == Subcommand::kBenchmark) {
    if (cfg.replications < 1) throw InvalidInputError("--reps must be >= 1");
    if (cfg.ns.empty() || cfg.noises.empty()) {
      throw InvalidInputError("--ns and --noises must be non-empty");
    }
  }
}

int run_cli(const CliConfig& cfg) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
  try {
    switch (cfg.subcommand) {
      case Subcommand::kFit: run_fit(cfg); break;
      case Subcommand::kSimulate: run_simulate(cfg); break;
      case Subcommand::kBenchmark: run_bench(cfg); break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qmave
