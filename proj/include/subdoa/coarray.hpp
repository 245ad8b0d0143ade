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
#include <vector>

#include "subdoa/geometry.hpp"
#include "subdoa/types.hpp"

namespace subdoa {

/// Coarray-domain observation on the contiguous lags -m*..m*.
struct CoarraySignal {
  int max_lag = 0;  // m*
  CVector values;   // values(k) is lag k - max_lag
  /// Lags of D outside the central contiguous part that were discarded.
  std::size_t dropped_lags = 0;

  int udof() const noexcept { return 2 * max_lag + 1; }
  cplx at(int lag) const { return values(lag + max_lag); }
  std::vector<int> lags() const;
};

struct SmoothedCovariance {
  CMatrix matrix;
  int m = 0;
};

/// Orthonormal basis of the M - D smallest-eigenvalue eigenvectors of a
/// smoothed coarray covariance.
struct NoiseSubspace {
  CMatrix basis;  // M x (M - D)
  int m = 0;
  int d = 0;
  RVector eigenvalues;  // all M eigenvalues, descending
  /// Set when some eigenvalue fell below -1e-10 * trace.
  bool psd_warning = false;

  CMatrix projector() const { return basis * basis.adjoint(); }
};

CMatrix sample_covariance(const CMatrix& block);

/// Averages r_hat over all sensor pairs sharing a lag and keeps the central
/// contiguous part of the difference coarray.
CoarraySignal coarray_vectorize(const CMatrix& r_hat, const SensorSet& array);

/// Forward spatial smoothing with M = m* + 1 windows of length M. Window 1
/// covers lags 0..M-1 and each following window slides one lag toward the
/// negative end.
SmoothedCovariance spatial_smooth(const CoarraySignal& sig);

NoiseSubspace noise_subspace(const SmoothedCovariance& rss, int d);

/// Covariance -> coarray -> smoothing -> noise subspace for one subarray.
NoiseSubspace coarray_noise_subspace(const CMatrix& covariance, const SensorSet& array, int d);

}  // namespace subdoa
