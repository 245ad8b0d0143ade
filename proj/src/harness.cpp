// SPDX-License-Identifier: Apache-2.0
//
// subdoa - DOA estimation with partially-calibrated sparse subarrays
// Copyright (C) 2026 The subdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "subdoa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "subdoa/crlb.hpp"
#include "subdoa/errors.hpp"

namespace subdoa {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::config_parse, msg); }

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error("key '" + key + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::gca_music: return "gca-music";
    case Estimator::gca_rmusic: return "gca-rmusic";
    case Estimator::ss_music: return "ss-music";
  }
  return "gca-music";
}

std::string_view to_string(SweepAxis a) noexcept {
  return a == SweepAxis::snr ? "snr" : "snapshots";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::gca_music, Estimator::gca_rmusic, Estimator::ss_music}) {
    if (name == to_string(e)) return e;
  }
  config_error("unknown estimator '" + std::string(name) + "'");
}

SensorSet GeometrySpec::resolve() const {
  if (builtin == "mra") return generate_mra(n);
  if (builtin == "naq2") return generate_naq2(n1, n2);
  if (builtin == "snaq2-7") return snaq2_7();
  if (builtin == "explicit") return SensorSet(positions);
  config_error("unknown geometry '" + builtin + "'");
}

void ExperimentConfig::validate() const {
  if (thetas.empty()) config_error("at least one source direction is required");
  for (double t : thetas) {
    if (!(t > -1.0 && t < 1.0)) config_error("source directions must lie in (-1, 1)");
  }
  for (double p : powers) {
    if (!(p > 0.0) || !std::isfinite(p)) config_error("source powers must be positive");
  }
  if (!powers.empty() && powers.size() != thetas.size()) {
    config_error("'powers' must have one entry per direction");
  }
  if (values.empty()) config_error("sweep 'values' must be non-empty");
  for (double v : values) {
    if (!std::isfinite(v)) config_error("sweep values must be finite");
    if (axis == SweepAxis::snapshots && (v < 1.0 || v != std::floor(v))) {
      config_error("snapshot counts must be positive integers");
    }
  }
  if (trials < 1) config_error("'trials' must be >= 1");
  if (workers < 1) config_error("'workers' must be >= 1");
  if (grid_size < 3) config_error("'grid_size' must be >= 3");
  if (snapshots < 1) config_error("'snapshots' must be >= 1");
  if (estimators.empty()) config_error("no estimators selected");
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(e.what());
  }
  if (!j.is_object()) config_error("configuration must be a JSON object");

  static const std::set<std::string> known = {
      "geometry", "n",       "n1",         "n2",     "positions",   "layout",   "subarrays",
      "mu",       "split_sizes", "thetas", "powers", "snr_db",      "snapshots", "axis",
      "values",   "trials",  "estimators", "grid_size", "include_crlb", "base_seed", "output",
      "workers",  "timing"};
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) config_error("unknown key '" + item.key() + "'");
  }

  ExperimentConfig c;
  if (j.contains("geometry")) {
    c.geometry.builtin = get_as<std::string>(j, "geometry");
  } else if (j.contains("positions")) {
    c.geometry.builtin = "explicit";
  }
  if (j.contains("n")) c.geometry.n = get_as<int>(j, "n");
  if (j.contains("n1")) c.geometry.n1 = get_as<int>(j, "n1");
  if (j.contains("n2")) c.geometry.n2 = get_as<int>(j, "n2");
  if (j.contains("positions")) c.geometry.positions = get_as<std::vector<int>>(j, "positions");
  if (j.contains("layout")) {
    const auto kind = get_as<std::string>(j, "layout");
    if (kind == "type1") c.layout = LayoutKind::type1;
    else if (kind == "type2") c.layout = LayoutKind::type2;
    else config_error("'layout' must be type1 or type2");
  }
  if (j.contains("subarrays")) c.subarrays = get_as<int>(j, "subarrays");
  if (j.contains("mu")) c.mu = get_as<int>(j, "mu");
  if (j.contains("split_sizes")) c.split_sizes = get_as<std::vector<int>>(j, "split_sizes");
  if (j.contains("thetas")) c.thetas = get_as<std::vector<double>>(j, "thetas");
  if (j.contains("powers")) c.powers = get_as<std::vector<double>>(j, "powers");
  if (j.contains("snr_db")) c.snr_db = get_as<double>(j, "snr_db");
  if (j.contains("snapshots")) c.snapshots = get_as<int>(j, "snapshots");
  if (j.contains("axis")) {
    const auto axis = get_as<std::string>(j, "axis");
    if (axis == "snr") c.axis = SweepAxis::snr;
    else if (axis == "snapshots") c.axis = SweepAxis::snapshots;
    else config_error("'axis' must be snr or snapshots");
  }
  if (j.contains("values")) c.values = get_as<std::vector<double>>(j, "values");
  if (j.contains("trials")) c.trials = get_as<int>(j, "trials");
  if (j.contains("estimators")) {
    c.estimators.clear();
    for (const auto& name : get_as<std::vector<std::string>>(j, "estimators")) {
      c.estimators.push_back(parse_estimator(name));
    }
  }
  if (j.contains("grid_size")) c.grid_size = get_as<int>(j, "grid_size");
  if (j.contains("include_crlb")) c.include_crlb = get_as<bool>(j, "include_crlb");
  if (j.contains("base_seed")) c.base_seed = get_as<std::uint64_t>(j, "base_seed");
  if (j.contains("output")) c.output = get_as<std::string>(j, "output");
  if (j.contains("workers")) c.workers = get_as<int>(j, "workers");
  if (j.contains("timing")) c.timing = get_as<bool>(j, "timing");
  if (c.values.empty()) c.values = {c.axis == SweepAxis::snr ? c.snr_db : c.snapshots};
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

SubarrayLayout build_layout(const ExperimentConfig& config) {
  try {
    const SensorSet array = config.geometry.resolve();
    if (config.layout == LayoutKind::type1) {
      const std::vector<int> sizes =
          config.split_sizes.empty() ? std::vector<int>{static_cast<int>(array.size())}
                                     : config.split_sizes;
      return split_type1(array, sizes);
    }
    return build_type2(array.canonical(), config.subarrays, config.mu);
  } catch (const Error& e) {
    if (e.code() == Errc::config_parse) throw;
    config_error(e.what());
  }
}

SceneConfig scene_at(const ExperimentConfig& config, double sweep_value, std::uint64_t seed) {
  const double snr = config.axis == SweepAxis::snr ? sweep_value : config.snr_db;
  const int t = config.axis == SweepAxis::snapshots ? static_cast<int>(sweep_value)
                                                    : config.snapshots;
  SceneConfig scene = scene_from_snr(config.thetas, snr, t, seed);
  if (!config.powers.empty()) scene.powers = config.powers;
  return scene;
}

double rmse(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size()) {
    throw Error(Errc::length_mismatch, "estimate and truth lengths differ");
  }
  if (truth.empty()) return 0.0;
  std::vector<double> e(estimates.begin(), estimates.end());
  std::vector<double> t(truth.begin(), truth.end());
  std::sort(e.begin(), e.end());
  std::sort(t.begin(), t.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) acc += (e[k] - t[k]) * (e[k] - t[k]);
  return std::sqrt(acc / static_cast<double>(e.size()));
}

double naive_rmse(std::span<const double> truth) {
  double mean_sq = 0.0;
  for (double th : truth) mean_sq += th * th;
  if (!truth.empty()) mean_sq /= static_cast<double>(truth.size());
  return std::sqrt(1.0 / 3.0 + mean_sq);
}

EstimateOutcome run_estimator(Estimator estimator, const SnapshotData& data,
                              const SubarrayLayout& layout, int d, int grid_size) {
  EstimateOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (estimator) {
      case Estimator::gca_music: {
        const auto subspaces = subarray_noise_subspaces(data, layout, d);
        out.estimates = gca_music(subspaces, grid_size, d).estimates;
        out.ok = true;
        break;
      }
      case Estimator::gca_rmusic: {
        const auto subspaces = subarray_noise_subspaces(data, layout, d);
        RootResult roots = gca_rmusic(subspaces, d);
        out.estimates = std::move(roots.estimates);
        out.ok = !roots.root_deficient;
        if (roots.root_deficient) out.failure = "root-deficiency";
        break;
      }
      case Estimator::ss_music:
        out.estimates = ss_music_baseline(data, layout, grid_size, d).estimates;
        out.ok = true;
        break;
    }
  } catch (const Error& e) {
    out.ok = false;
    out.failure = to_string(e.code());
  }
  out.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

struct TrialResult {
  std::vector<char> ok;
  std::vector<double> mse;
  std::vector<double> runtime;
};

void check_identifiable(const ExperimentConfig& config, const SubarrayLayout& layout) {
  const int d = static_cast<int>(config.thetas.size());
  for (Estimator e : config.estimators) {
    int limit = 0;
    if (e == Estimator::ss_music) {
      limit = difference_coarray(layout.full_array()).max_contiguous_lag();
    } else {
      limit = std::numeric_limits<int>::max();
      for (const auto& sub : layout.subarrays()) {
        limit = std::min(limit, difference_coarray(sub).max_contiguous_lag());
      }
    }
    if (d > limit) {
      config_error(fmt::format("{} resolves at most {} sources on this layout, {} requested",
                               to_string(e), limit, d));
    }
  }
}

}  // namespace

std::vector<RmseRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const SubarrayLayout layout = build_layout(config);
  check_identifiable(config, layout);
  const int d = static_cast<int>(config.thetas.size());
  const std::size_t n_est = config.estimators.size();
  std::vector<RmseRecord> records;

  for (std::size_t sweep = 0; sweep < config.values.size(); ++sweep) {
    const double value = config.values[sweep];
    {
      // Validates the scene once up front so bad directions surface as a
      // configuration error rather than a string of failed trials.
      SceneConfig probe = scene_at(config, value, 0);
      try {
        probe.validate();
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int trial = next++; trial < config.trials; trial = next++) {
        const SceneConfig scene =
            scene_at(config, value, derive_seed(config.base_seed, sweep, static_cast<std::uint64_t>(trial)));
        const CalibrationSet calib = default_calibration(layout, scene.thetas);
        const SnapshotData data = simulate(layout, scene, calib);
        TrialResult& r = results[static_cast<std::size_t>(trial)];
        r.ok.resize(n_est);
        r.mse.resize(n_est);
        r.runtime.resize(n_est);
        for (std::size_t k = 0; k < n_est; ++k) {
          const EstimateOutcome o =
              run_estimator(config.estimators[k], data, layout, d, config.grid_size);
          r.ok[k] = o.ok;
          r.runtime[k] = o.runtime_s;
          if (o.ok) {
            const double e = rmse(o.estimates, scene.thetas);
            r.mse[k] = e * e;
          }
        }
      }
    };
    const int n_workers = std::min(config.workers, config.trials);
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    std::optional<double> pc, fc;
    if (config.include_crlb) {
      const SceneConfig scene = scene_at(config, value, 0);
      const CalibrationSet calib = default_calibration(layout, scene.thetas);
      auto root_mean = [](const CrlbResult& c) { return std::sqrt(c.theta_bound.diagonal().mean()); };
      pc = root_mean(crlb_theta(assemble_fim(layout, scene, calib, scene.snapshots)));
      fc = root_mean(crlb_fc_up(layout.full_array(), scene, scene.snapshots));
    }

    for (std::size_t k = 0; k < n_est; ++k) {
      RmseRecord rec;
      rec.estimator = config.estimators[k];
      rec.axis = config.axis;
      rec.value = value;
      rec.trials = config.trials;
      double sum_mse = 0.0;
      double sum_time = 0.0;
      int ok = 0;
      // Trial order is fixed, so the sums do not depend on scheduling.
      for (const TrialResult& r : results) {
        sum_time += r.runtime[k];
        if (r.ok[k]) {
          sum_mse += r.mse[k];
          ++ok;
        }
      }
      rec.failures = config.trials - ok;
      rec.rmse = ok > 0 ? std::sqrt(sum_mse / ok) : std::numeric_limits<double>::quiet_NaN();
      rec.mean_runtime_s = config.timing ? sum_time / config.trials : 0.0;
      rec.crlb_pc_up = pc;
      rec.crlb_fc_up = fc;
      records.push_back(rec);
    }
  }

  if (!config.output.empty()) {
    std::ofstream out(config.output, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + config.output);
    write_csv(out, records, config.include_crlb);
  }
  return records;
}

std::string format_double(double v) { return fmt::format("{}", v); }

void write_csv(std::ostream& os, std::span<const RmseRecord> records, bool include_crlb) {
  os << "estimator,axis,value,rmse,failures,trials,mean_runtime_s";
  if (include_crlb) os << ",crlb_pc_up,crlb_fc_up";
  os << '\n';
  for (const RmseRecord& r : records) {
    os << to_string(r.estimator) << ',' << to_string(r.axis) << ',' << format_double(r.value)
       << ',' << format_double(r.rmse) << ',' << r.failures << ',' << r.trials << ','
       << format_double(r.mean_runtime_s);
    if (include_crlb) {
      os << ',' << (r.crlb_pc_up ? format_double(*r.crlb_pc_up) : "")
         << ',' << (r.crlb_fc_up ? format_double(*r.crlb_fc_up) : "");
    }
    os << '\n';
  }
}

}  // namespace subdoa
