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

#include "qmave/simulate.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cstring>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qmave/error.hpp"

namespace qmave {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::array<NoiseLaw, 4> kLaws{
    NoiseLaw::kScaledT1, NoiseLaw::kCenteredQuarticNormal, NoiseLaw::kScaledT5,
    NoiseLaw::kScaledNormal};

// Student t with nu degrees of freedom from nu + 1 consecutive normals.
double student_t(const CounterRng& rng, std::uint64_t draw, int nu) {
  const std::uint64_t base = draw * static_cast<std::uint64_t>(nu + 1);
  const double z = rng.normal(base);
  double chi2 = 0.0;
  for (int k = 1; k <= nu; ++k) {
    const double g = rng.normal(base + static_cast<std::uint64_t>(k));
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / nu);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix_finalize(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto w : words) h = splitmix_finalize(h ^ splitmix_finalize(w + kGolden));
  return h;
}

std::string_view to_string(NoiseLaw law) {
  switch (law) {
    case NoiseLaw::kScaledT1: return "t1";
    case NoiseLaw::kCenteredQuarticNormal: return "quartic";
    case NoiseLaw::kScaledT5: return "t5";
    case NoiseLaw::kScaledNormal: return "normal";
  }
  return "?";
}

std::string_view noise_label(NoiseLaw law) {
  switch (law) {
    case NoiseLaw::kScaledT1: return "0.05t(1)";
    case NoiseLaw::kCenteredQuarticNormal: return "0.1(N(0,1)^4-3)";
    case NoiseLaw::kScaledT5: return "sqrt(5)t(5)/20";
    case NoiseLaw::kScaledNormal: return "N(0,1)/4";
  }
  return "?";
}

std::optional<NoiseLaw> parse_noise_law(std::string_view name) {
  for (auto law : kLaws) {
    if (to_string(law) == name) return law;
  }
  return std::nullopt;
}

std::string_view to_string(Method m) {
  return m == Method::kMave ? "MAVE" : "qMAVE";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "MAVE" || name == "mave") return Method::kMave;
  if (name == "qMAVE" || name == "qmave") return Method::kQmave;
  return std::nullopt;
}

Eigen::VectorXd default_theta0() {
  Eigen::VectorXd t(5);
  t << 1.0, 2.0, 0.0, 0.0, 2.0;
  return t / 3.0;
}

Eigen::MatrixXd gen_design(std::size_t n, std::uint64_t seed) {
  constexpr int kDim = 5;
  Eigen::MatrixXd sigma(kDim, kDim);
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) sigma(i, j) = std::pow(0.5, std::abs(i - j));
  }
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  const CounterRng rng(seed);
  Eigen::MatrixXd x0(static_cast<Eigen::Index>(n), kDim);
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    for (int l = 0; l < kDim; ++l) {
      x0(i, l) = rng.normal(static_cast<std::uint64_t>(i) * kDim +
                            static_cast<std::uint64_t>(l));
    }
  }
  return x0 * chol.transpose();
}

Eigen::VectorXd gen_noise(NoiseLaw law, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::VectorXd e(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (law) {
      case NoiseLaw::kScaledT1:
        v = 0.05 * student_t(rng, i, 1);
        break;
      case NoiseLaw::kCenteredQuarticNormal: {
        const double z = rng.normal(i);
        v = 0.1 * (z * z * z * z - 3.0);
        break;
      }
      case NoiseLaw::kScaledT5:
        v = std::sqrt(5.0) / 20.0 * student_t(rng, i, 5);
        break;
      case NoiseLaw::kScaledNormal:
        v = rng.normal(i) / 4.0;
        break;
    }
    e[static_cast<Eigen::Index>(i)] = v;
  }
  return e;
}

std::pair<Dataset, Eigen::VectorXd> gen_model8(const SimConfig& cfg) {
  if (cfg.n < 2) throw InvalidInputError("simulation needs n >= 2");
  if (cfg.theta0.size() != 5 || std::abs(cfg.theta0.norm() - 1.0) > 1e-8) {
    throw InvalidInputError("theta0 must be a unit vector in R^5");
  }
  Eigen::MatrixXd x = gen_design(cfg.n, mix_seed({cfg.seed, 1}));
  const Eigen::VectorXd noise =
      gen_noise(cfg.noise, cfg.n, mix_seed({cfg.seed, 2}));
  const Eigen::VectorXd index = x * cfg.theta0;
  Eigen::VectorXd y =
      (-5.0 * index.array().square()).exp().matrix() + cfg.noise_scale * noise;
  return {Dataset(std::move(x), std::move(y)), cfg.theta0};
}

std::uint64_t dataset_fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(v));
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index l = 0; l < data.d(); ++l) eat(data.x()(i, l));
    eat(data.y()[i]);
  }
  return h;
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t n,
                               NoiseLaw law, std::size_t rep) {
  return mix_seed({base_seed, n, static_cast<std::uint64_t>(law), rep});
}

const BenchmarkRow* BenchmarkReport::find(std::size_t n, Method m,
                                          NoiseLaw law) const {
  for (const auto& r : rows) {
    if (r.n == n && r.method == m && r.noise == law) return &r;
  }
  return nullptr;
}

std::string BenchmarkReport::to_csv() const {
  std::ostringstream out;
  out << "n,method,noise,mean_error,sd_error,replications,excluded\n";
  for (const auto& r : rows) {
    out << r.n << ',' << to_string(r.method) << ',' << to_string(r.noise)
        << ',' << format_double(r.mean_error) << ','
        << format_double(r.sd_error) << ',' << r.replications << ','
        << r.excluded << '\n';
  }
  return out.str();
}

std::string BenchmarkReport::to_json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["n"] = r.n;
    row["method"] = to_string(r.method);
    row["noise"] = to_string(r.noise);
    if (std::isnan(r.mean_error)) {
      row["mean_error"] = nullptr;
      row["sd_error"] = nullptr;
    } else {
      row["mean_error"] = r.mean_error;
      row["sd_error"] = r.sd_error;
    }
    row["replications"] = r.replications;
    row["excluded"] = r.excluded;
    row["flagged"] = r.flagged;
    rows_json.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(rows_json);
  return doc.dump(2) + "\n";
}

BenchmarkReport run_benchmark(const BenchmarkSpec& spec) {
  if (spec.replications < 1) {
    throw InvalidInputError("benchmark needs at least one replication");
  }
  const std::size_t n_laws = spec.laws.size();
  const std::size_t n_methods = spec.methods.size();
  const std::size_t reps = spec.replications;
  const std::size_t jobs = spec.ns.size() * n_laws * reps;

  // errors[job * n_methods + m]; NaN marks a failed fit.
  std::vector<double> errors(jobs * n_methods,
                             std::numeric_limits<double>::quiet_NaN());

  auto run_job = [&](std::size_t job) {
    const std::size_t rep = job % reps;
    const std::size_t law_idx = (job / reps) % n_laws;
    const std::size_t n_idx = job / (reps * n_laws);
    SimConfig sim;
    sim.n = spec.ns[n_idx];
    sim.theta0 = spec.theta0;
    sim.noise = spec.laws[law_idx];
    sim.seed = replication_seed(spec.base_seed, sim.n, sim.noise, rep);
    std::optional<std::pair<Dataset, Eigen::VectorXd>> sample;
    try {
      sample.emplace(gen_model8(sim));
    } catch (const Error&) {
      return;
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      QmaveConfig cfg = spec.fit;
      cfg.loss = spec.methods[m] == Method::kQmave ? LossSpec::Quantile(0.5)
                                                   : LossSpec::Squared();
      try {
        const IndexFit fit = qmave_fit(sample->first, cfg);
        errors[job * n_methods + m] = estimation_error(fit.theta, sim.theta0);
      } catch (const Error&) {
      }
    }
  };

  std::size_t threads = spec.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs, 1));
  if (threads <= 1) {
    for (std::size_t job = 0; job < jobs; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < jobs; job = next++) run_job(job);
      });
    }
  }

  BenchmarkReport report;
  for (std::size_t n_idx = 0; n_idx < spec.ns.size(); ++n_idx) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      for (std::size_t law_idx = 0; law_idx < n_laws; ++law_idx) {
        std::vector<double> ok;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          const std::size_t job = (n_idx * n_laws + law_idx) * reps + rep;
          const double e = errors[job * n_methods + m];
          if (!std::isnan(e)) ok.push_back(e);
        }
        BenchmarkRow row;
        row.n = spec.ns[n_idx];
        row.method = spec.methods[m];
        row.noise = spec.laws[law_idx];
        row.replications = reps;
        row.excluded = reps - ok.size();
        row.flagged = 10 * row.excluded > reps;
        if (ok.empty()) {
          row.mean_error = row.sd_error =
              std::numeric_limits<double>::quiet_NaN();
        } else {
          double sum = 0.0;
          for (double e : ok) sum += e;
          row.mean_error = sum / static_cast<double>(ok.size());
          double ss = 0.0;
          for (double e : ok) ss += (e - row.mean_error) * (e - row.mean_error);
          row.sd_error = ok.size() > 1
                             ? std::sqrt(ss / static_cast<double>(ok.size() - 1))
                             : 0.0;
        }
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace qmave
