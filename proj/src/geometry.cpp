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

#include "subdoa/geometry.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "subdoa/errors.hpp"

namespace subdoa {

SensorSet::SensorSet(std::vector<int> positions) : positions_(std::move(positions)) {
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    if (positions_[k] < 0) {
      throw Error(Errc::invalid_argument, "sensor positions must be non-negative");
    }
    if (k > 0 && positions_[k] <= positions_[k - 1]) {
      throw Error(Errc::invalid_argument, "sensor positions must be strictly ascending");
    }
  }
}

SensorSet SensorSet::translated(int delta) const {
  std::vector<int> shifted(positions_);
  for (int& p : shifted) p += delta;
  return SensorSet(std::move(shifted));
}

SubarrayLayout::SubarrayLayout(std::vector<SensorSet> subarrays, LayoutKind kind,
                               std::optional<int> mu)
    : subarrays_(std::move(subarrays)), kind_(kind), mu_(mu) {
  if (subarrays_.empty()) {
    throw Error(Errc::invalid_argument, "layout needs at least one subarray");
  }
  for (std::size_t l = 0; l < subarrays_.size(); ++l) {
    if (subarrays_[l].empty()) {
      throw Error(Errc::invalid_argument, "empty subarray " + std::to_string(l));
    }
    if (l > 0 && subarrays_[l].min() <= subarrays_[l - 1].max()) {
      throw Error(Errc::invalid_argument,
                  "subarrays must be disjoint and ordered along the line");
    }
  }
  if (kind_ == LayoutKind::type2 && !mu_) {
    throw Error(Errc::invalid_argument, "type-II layout requires mu");
  }
}

std::size_t SubarrayLayout::row_offset(std::size_t l) const {
  std::size_t rows = 0;
  for (std::size_t i = 0; i < l && i < subarrays_.size(); ++i) rows += subarrays_[i].size();
  return rows;
}

std::size_t SubarrayLayout::total_sensors() const { return row_offset(subarrays_.size()); }

SensorSet SubarrayLayout::full_array() const {
  std::vector<int> all;
  all.reserve(total_sensors());
  for (const auto& s : subarrays_) all.insert(all.end(), s.positions().begin(), s.positions().end());
  return SensorSet(std::move(all));
}

int CoarrayProfile::weight_at(int lag) const {
  auto it = weight.find(lag);
  return it == weight.end() ? 0 : it->second;
}

SensorSet generate_naq2(int n1, int n2) {
  if (n1 < 1 || n2 < 1) {
    throw Error(Errc::invalid_argument, "nested array needs n1 >= 1 and n2 >= 1");
  }
  std::vector<int> pos;
  pos.reserve(static_cast<std::size_t>(n1 + n2));
  for (int n = 0; n < n1; ++n) pos.push_back(n);
  // The inner ULA ends at n1 - 1 and the first outer sensor sits at n1, so
  // the two levels never collide.
  for (int n = 1; n <= n2; ++n) pos.push_back(n * (n1 + 1) - 1);
  return SensorSet(std::move(pos));
}

SensorSet generate_mra(int n) {
  // Restricted MRAs (Moffet 1968; Ishiguro 1980 for N >= 8).
  static const std::array<std::vector<int>, 9> table = {{
      {0, 1},
      {0, 1, 3},
      {0, 1, 4, 6},
      {0, 1, 4, 7, 9},
      {0, 1, 6, 9, 11, 13},
      {0, 1, 4, 10, 12, 15, 17},
      {0, 1, 4, 10, 16, 18, 21, 23},
      {0, 1, 4, 10, 16, 22, 24, 27, 29},
      {0, 1, 3, 6, 13, 20, 27, 31, 35, 36},
  }};
  if (n < 2 || n > 10) {
    throw Error(Errc::unsupported_size,
                "no minimum redundancy array tabulated for N = " + std::to_string(n));
  }
  return SensorSet(table[static_cast<std::size_t>(n - 2)]);
}

SensorSet snaq2_7() { return SensorSet{0, 2, 3, 6, 9, 13, 14}; }

SubarrayLayout split_type1(const SensorSet& array, std::span<const int> sizes) {
  const long total = std::accumulate(sizes.begin(), sizes.end(), 0L);
  if (total != static_cast<long>(array.size())) {
    throw Error(Errc::size_mismatch, "subarray sizes sum to " + std::to_string(total) +
                                         " but the array has " + std::to_string(array.size()) +
                                         " sensors");
  }
  std::vector<SensorSet> subs;
  auto it = array.positions().begin();
  for (int sz : sizes) {
    if (sz < 1) throw Error(Errc::invalid_argument, "subarray sizes must be positive");
    subs.emplace_back(std::vector<int>(it, it + sz));
    it += sz;
  }
  return SubarrayLayout(std::move(subs), LayoutKind::type1);
}

SubarrayLayout build_type2(const SensorSet& reference, int l, int mu) {
  if (!reference.is_canonical()) {
    throw Error(Errc::invalid_argument, "type-II reference must start at position 0");
  }
  if (l < 1) throw Error(Errc::invalid_argument, "need at least one subarray");
  if (mu < 1) throw Error(Errc::invalid_argument, "intersubarray spacing mu must be >= 1");
  const int delta = mu + reference.aperture();
  std::vector<SensorSet> subs;
  subs.reserve(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) subs.push_back(reference.translated(i * delta));
  return SubarrayLayout(std::move(subs), LayoutKind::type2, mu);
}

CoarrayProfile difference_coarray(const SensorSet& array) {
  CoarrayProfile prof;
  if (array.empty()) return prof;
  for (int a : array.positions()) {
    for (int b : array.positions()) ++prof.weight[a - b];
  }
  prof.diff_set.reserve(prof.weight.size());
  for (const auto& [lag, w] : prof.weight) prof.diff_set.push_back(lag);
  prof.dof = static_cast<int>(prof.diff_set.size());

  int m_star = 0;
  while (prof.weight.count(m_star + 1) != 0) ++m_star;
  for (int m = -m_star; m <= m_star; ++m) prof.central_set.push_back(m);
  prof.udof = 2 * m_star + 1;
  return prof;
}

DofBound type2_dof_bound(int sdof, int l, int mu, int kappa) {
  if (mu < 1) throw Error(Errc::invalid_argument, "mu must be >= 1");
  if (l < 1) throw Error(Errc::invalid_argument, "L must be >= 1");
  if (sdof < 1 || sdof % 2 == 0) throw Error(Errc::invalid_argument, "sDoF must be odd and positive");
  if (mu <= kappa) {
    return {l * (sdof - 1) + 2 * (l - 1) * mu + 1, DofRegime::overlapping};
  }
  return {(2 * l - 1) * sdof, DofRegime::disjoint};
}

int max_identifiable_sources(const SubarrayLayout& layout) {
  int best = 0;
  for (const auto& sub : layout.subarrays()) {
    const int udof = difference_coarray(sub).udof;
    if (udof < 3) {
      throw Error(Errc::degenerate_geometry,
                  "subarray coarray has no contiguous lag beyond zero");
    }
    best = std::max(best, (udof - 1) / 2);
  }
  return best;
}

std::string_view to_string(LayoutKind kind) noexcept {
  switch (kind) {
    case LayoutKind::type1: return "type-I";
    case LayoutKind::type2: return "type-II";
    case LayoutKind::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(DofRegime regime) noexcept {
  return regime == DofRegime::overlapping ? "overlapping" : "disjoint";
}

}  // namespace subdoa
