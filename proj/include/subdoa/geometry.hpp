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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace subdoa {

/// Integer sensor positions of a sparse linear (sub)array, in multiples of
/// the minimum intersensor spacing. Always strictly ascending and
/// non-negative.
class SensorSet {
 public:
  SensorSet() = default;
  explicit SensorSet(std::vector<int> positions);
  SensorSet(std::initializer_list<int> positions)
      : SensorSet(std::vector<int>(positions)) {}

  const std::vector<int>& positions() const noexcept { return positions_; }
  std::size_t size() const noexcept { return positions_.size(); }
  bool empty() const noexcept { return positions_.empty(); }
  int operator[](std::size_t k) const { return positions_[k]; }

  int min() const { return positions_.front(); }
  int max() const { return positions_.back(); }
  /// max - min
  int aperture() const { return empty() ? 0 : max() - min(); }
  bool is_canonical() const { return !empty() && min() == 0; }

  SensorSet translated(int delta) const;
  SensorSet canonical() const { return empty() ? *this : translated(-min()); }

  friend bool operator==(const SensorSet&, const SensorSet&) = default;

 private:
  std::vector<int> positions_;
};

enum class LayoutKind { type1, type2, custom };

/// A partition of the full array into internally calibrated subarrays.
/// Subarrays are stored in absolute coordinates; every position of
/// subarray i precedes every position of subarray j for i < j.
class SubarrayLayout {
 public:
  SubarrayLayout(std::vector<SensorSet> subarrays, LayoutKind kind,
                 std::optional<int> mu = std::nullopt);

  const std::vector<SensorSet>& subarrays() const noexcept { return subarrays_; }
  const SensorSet& subarray(std::size_t l) const { return subarrays_.at(l); }
  std::size_t count() const noexcept { return subarrays_.size(); }
  LayoutKind kind() const noexcept { return kind_; }
  std::optional<int> mu() const noexcept { return mu_; }

  /// Position of the first sensor of subarray l; the translation that maps
  /// the subarray's local geometry onto absolute coordinates.
  int offset(std::size_t l) const { return subarrays_.at(l).min(); }
  /// Subarray l expressed relative to its own first sensor.
  SensorSet local(std::size_t l) const { return subarrays_.at(l).canonical(); }

  /// Index of the first row of subarray l in the stacked N-vector.
  std::size_t row_offset(std::size_t l) const;
  std::size_t total_sensors() const;
  SensorSet full_array() const;

 private:
  std::vector<SensorSet> subarrays_;
  LayoutKind kind_;
  std::optional<int> mu_;
};

/// Difference-coarray statistics of a sensor set.
struct CoarrayProfile {
  std::vector<int> diff_set;     // D, ascending
  std::vector<int> central_set;  // U = {-m*, ..., m*}
  std::map<int, int> weight;     // w(m) > 0 exactly on D
  int dof = 0;
  int udof = 0;

  int weight_at(int lag) const;
  /// m* = (udof - 1) / 2
  int max_contiguous_lag() const { return (udof - 1) / 2; }
  bool hole_free() const { return dof == udof; }
};

SensorSet generate_naq2(int n1, int n2);

/// Restricted (hole-free) minimum redundancy arrays for 2 <= n <= 10.
SensorSet generate_mra(int n);

/// Super nested array with seven sensors, {0,2,3,6,9,13,14}.
SensorSet snaq2_7();

SubarrayLayout split_type1(const SensorSet& array, std::span<const int> sizes);
SubarrayLayout build_type2(const SensorSet& reference, int l, int mu);

CoarrayProfile difference_coarray(const SensorSet& array);

enum class DofRegime { overlapping, disjoint };

struct DofBound {
  int bound = 0;
  DofRegime regime = DofRegime::overlapping;
};

/// DoF of a type-II array built from L translates of a reference whose own
/// coarray has `sdof` lags and aperture `kappa`. Exact in the disjoint
/// regime, an upper bound (tight for hole-free references) otherwise.
DofBound type2_dof_bound(int sdof, int l, int mu, int kappa);

/// Largest number of sources the coarray subspace estimators can resolve:
/// max_l (udof_l - 1) / 2.
int max_identifiable_sources(const SubarrayLayout& layout);

std::string_view to_string(LayoutKind kind) noexcept;
std::string_view to_string(DofRegime regime) noexcept;

}  // namespace subdoa
