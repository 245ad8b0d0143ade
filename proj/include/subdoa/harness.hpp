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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subdoa/estimators.hpp"
#include "subdoa/geometry.hpp"
#include "subdoa/signal_model.hpp"

namespace subdoa {

enum class Estimator { gca_music, gca_rmusic, ss_music };
enum class SweepAxis { snr, snapshots };

std::string_view to_string(Estimator e) noexcept;
std::string_view to_string(SweepAxis a) noexcept;
Estimator parse_estimator(std::string_view name);

/// A builtin geometry ("mra", "naq2", "snaq2-7") or an explicit list.
struct GeometrySpec {
  std::string builtin = "mra";
  int n = 7;
  int n1 = 4;
  int n2 = 3;
  std::vector<int> positions;

  SensorSet resolve() const;
};

struct ExperimentConfig {
  GeometrySpec geometry;
  LayoutKind layout = LayoutKind::type2;
  int subarrays = 2;
  int mu = 8;
  std::vector<int> split_sizes;  // type-I only

  std::vector<double> thetas;
  std::vector<double> powers;  // empty means unit powers
  double snr_db = 0.0;
  int snapshots = 2000;

  SweepAxis axis = SweepAxis::snr;
  std::vector<double> values;
  int trials = 1000;
  std::vector<Estimator> estimators{Estimator::gca_music, Estimator::gca_rmusic};
  int grid_size = kDefaultGridSize;
  bool include_crlb = false;
  std::uint64_t base_seed = 1;
  std::string output;
  int workers = 1;
  /// When false the runtime column is written as 0 so output bytes depend
  /// only on the configuration.
  bool timing = true;

  void validate() const;
};

/// Parses the flat JSON configuration; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

SubarrayLayout build_layout(const ExperimentConfig& config);
/// Scene at one sweep point; the SNR sets sigma^2 = 10^(-snr/10) relative to
/// the source powers.
SceneConfig scene_at(const ExperimentConfig& config, double sweep_value, std::uint64_t seed);

/// Root mean squared error after sorting both vectors ascending.
double rmse(std::span<const double> estimates, std::span<const double> truth);
/// RMSE of directions drawn uniformly on (-1, 1): sqrt(1/3 + mean theta^2).
double naive_rmse(std::span<const double> truth);

struct EstimateOutcome {
  bool ok = false;
  std::vector<double> estimates;
  double runtime_s = 0.0;
  std::string failure;
};

/// Runs one estimator end to end on raw snapshots (sample covariance
/// included in the runtime). Numerical failures are reported, not thrown.
EstimateOutcome run_estimator(Estimator estimator, const SnapshotData& data,
                              const SubarrayLayout& layout, int d, int grid_size);

struct RmseRecord {
  Estimator estimator = Estimator::gca_music;
  SweepAxis axis = SweepAxis::snr;
  double value = 0.0;
  double rmse = 0.0;
  int failures = 0;
  int trials = 0;
  double mean_runtime_s = 0.0;
  /// sqrt of the source-averaged bound, comparable with `rmse`.
  std::optional<double> crlb_pc_up;
  std::optional<double> crlb_fc_up;
};

std::vector<RmseRecord> run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& os, std::span<const RmseRecord> records, bool include_crlb);
/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace subdoa
