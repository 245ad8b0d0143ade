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

#include <span>
#include <vector>

#include "subdoa/coarray.hpp"
#include "subdoa/geometry.hpp"
#include "subdoa/signal_model.hpp"
#include "subdoa/types.hpp"

namespace subdoa {

inline constexpr int kDefaultGridSize = 4001;

struct SpectrumResult {
  std::vector<double> grid;       // ascending, in (-1, 1]
  std::vector<double> values;     // pseudo-spectrum on the grid
  std::vector<double> estimates;  // D peak locations, ascending
};

struct RootResult {
  std::vector<cplx> roots_all;
  std::vector<cplx> selected;
  std::vector<double> estimates;  // angle(selected) / pi, ascending
  /// Fewer than D roots lie inside the unit circle; `selected` was then
  /// filled from all roots by distance to the circle.
  bool root_deficient = false;
};

/// g points theta_i = -1 + 2 i / g, i = 1..g.
std::vector<double> uniform_grid(int grid_size);

/// [1, e^{j pi theta}, ..., e^{j pi (m-1) theta}]^T
CVector coarray_steering(int m, double theta);

/// sum_l || V_l^H a_{M_l}(theta) ||^2
double gca_denominator(std::span<const NoiseSubspace> subspaces, double theta);

SpectrumResult gca_music(std::span<const NoiseSubspace> subspaces, int grid_size, int d);

/// Sum of the subarray noise projectors, each zero-padded into the trailing
/// block of the largest one.
CMatrix build_global_projection(std::span<const NoiseSubspace> subspaces);

/// Coefficients c_k, k = -(M-1)..(M-1), of Q(z) = f^T(1/z) P f(z); index
/// k + M - 1 in the returned vector.
CVector projection_polynomial(const CMatrix& projection);

/// Roots of sum_j coeffs(j) z^j via companion-matrix eigenvalues.
std::vector<cplx> polynomial_roots(const CVector& coeffs);

RootResult gca_rmusic(std::span<const NoiseSubspace> subspaces, int d);

/// One noise subspace per subarray, each built from that subarray's sample
/// covariance in local coordinates.
std::vector<NoiseSubspace> subarray_noise_subspaces(const SnapshotData& data,
                                                    const SubarrayLayout& layout, int d);

/// Coarray MUSIC on the full, fully calibrated array.
SpectrumResult ss_music_baseline(const SnapshotData& full_data, const SubarrayLayout& layout,
                                 int grid_size, int d);

}  // namespace subdoa
