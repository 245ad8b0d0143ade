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
#include <span>
#include <vector>

#include "subdoa/geometry.hpp"
#include "subdoa/types.hpp"

namespace subdoa {

/// Source directions (normalized, sine of the DOA), source powers, noise
/// variance and snapshot count of one simulated scene.
struct SceneConfig {
  std::vector<double> thetas;
  std::vector<double> powers;
  double noise_var = 1.0;
  int snapshots = 1;
  std::uint64_t seed = 0;

  std::size_t num_sources() const noexcept { return thetas.size(); }
  /// Throws invalid_argument when an invariant is broken.
  void validate() const;
};

/// Unit powers and noise variance 10^(-snr_db/10).
SceneConfig scene_from_snr(std::vector<double> thetas, double snr_db, int snapshots,
                           std::uint64_t seed);

/// L x D matrix of per-subarray, per-source calibration phases. Row 0 is the
/// reference subarray and is all ones; every entry has unit modulus.
class CalibrationSet {
 public:
  explicit CalibrationSet(CMatrix h);
  const CMatrix& h() const noexcept { return h_; }
  std::size_t subarrays() const noexcept { return static_cast<std::size_t>(h_.rows()); }
  std::size_t sources() const noexcept { return static_cast<std::size_t>(h_.cols()); }

 private:
  CMatrix h_;
};

/// Per-subarray snapshot blocks X_l (N_l x T) driven by the same sources.
struct SnapshotData {
  std::vector<CMatrix> blocks;

  std::size_t snapshots() const { return blocks.empty() ? 0 : blocks.front().cols(); }
  /// Row-wise concatenation: the full-array snapshot matrix.
  CMatrix stacked() const;
};

CVector steering_vector(const SensorSet& array, double theta);
CMatrix steering_matrix(const SensorSet& array, std::span<const double> thetas);

/// h_{l,d} = exp(j pi offset_l theta_d): the phase a subarray's local
/// manifold picks up from its true position on the line.
CalibrationSet default_calibration(const SubarrayLayout& layout, std::span<const double> thetas);

/// Draws source and noise realizations from scene.seed. Subarray manifolds
/// are evaluated in local coordinates, so inter-subarray geometry reaches
/// the data only through the calibration phases.
SnapshotData simulate(const SubarrayLayout& layout, const SceneConfig& scene,
                      const CalibrationSet& calib);

CMatrix exact_subarray_covariance(const SensorSet& array_l, const SceneConfig& scene);
CMatrix exact_full_covariance(const SubarrayLayout& layout, const SceneConfig& scene,
                              const CalibrationSet& calib);

/// The calibrated mixing matrix W = [V(theta_d) h_d]; the calibration matrix
/// is not required to be unit modulus here.
CMatrix mixing_matrix(const SubarrayLayout& layout, std::span<const double> thetas,
                      const CMatrix& h);

/// W diag(p) W^H + sigma^2 I for an arbitrary calibration matrix.
CMatrix model_covariance(const SubarrayLayout& layout, std::span<const double> thetas,
                         std::span<const double> powers, double noise_var, const CMatrix& h);

/// Stateless 64-bit mixing of a base seed with trial coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace subdoa
