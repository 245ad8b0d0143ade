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

#include "subdoa/coarray.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "subdoa/errors.hpp"

namespace subdoa {

std::vector<int> CoarraySignal::lags() const {
  std::vector<int> out(static_cast<std::size_t>(udof()));
  std::iota(out.begin(), out.end(), -max_lag);
  return out;
}

CMatrix sample_covariance(const CMatrix& block) {
  if (block.cols() == 0) throw Error(Errc::empty_data, "no snapshots");
  CMatrix r = CMatrix::Zero(block.rows(), block.rows());
  r.selfadjointView<Eigen::Lower>().rankUpdate(block, 1.0 / static_cast<double>(block.cols()));
  return r.selfadjointView<Eigen::Lower>();
}

CoarraySignal coarray_vectorize(const CMatrix& r_hat, const SensorSet& array) {
  const auto n = static_cast<Eigen::Index>(array.size());
  if (r_hat.rows() != n || r_hat.cols() != n) {
    throw Error(Errc::dimension_mismatch, "covariance is " + std::to_string(r_hat.rows()) + "x" +
                                              std::to_string(r_hat.cols()) + " but the array has " +
                                              std::to_string(n) + " sensors");
  }
  const CoarrayProfile prof = difference_coarray(array);
  CoarraySignal sig;
  sig.max_lag = prof.max_contiguous_lag();
  sig.dropped_lags = static_cast<std::size_t>(prof.dof - prof.udof);
  sig.values = CVector::Zero(sig.udof());
  // Entry (i, k) of E[x x^H] is the lag n_i - n_k.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const int lag = array[static_cast<std::size_t>(i)] - array[static_cast<std::size_t>(k)];
      if (std::abs(lag) <= sig.max_lag) sig.values(lag + sig.max_lag) += r_hat(i, k);
    }
  }
  for (int lag = -sig.max_lag; lag <= sig.max_lag; ++lag) {
    sig.values(lag + sig.max_lag) /= static_cast<double>(prof.weight_at(lag));
  }
  return sig;
}

SmoothedCovariance spatial_smooth(const CoarraySignal& sig) {
  if (sig.values.size() != sig.udof() || sig.values.size() == 0) {
    throw Error(Errc::degenerate, "coarray signal has no contiguous lags");
  }
  const int m = sig.max_lag + 1;
  SmoothedCovariance out;
  out.m = m;
  out.matrix = CMatrix::Zero(m, m);
  for (int i = 1; i <= m; ++i) {
    // J_i = [0_{M x (M-i)}, I_M, 0_{M x (i-1)}]
    const auto window = sig.values.segment(m - i, m);
    out.matrix.noalias() += window * window.adjoint();
  }
  out.matrix /= static_cast<double>(m);
  return out;
}

NoiseSubspace noise_subspace(const SmoothedCovariance& rss, int d) {
  const int m = static_cast<int>(rss.matrix.rows());
  if (d < 0) throw Error(Errc::invalid_argument, "negative source count");
  if (d >= m) {
    throw Error(Errc::too_many_sources, std::to_string(d) + " sources need a smoothed covariance "
                                        "larger than " + std::to_string(m) + "x" +
                                        std::to_string(m));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rss.matrix);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::degenerate, "eigendecomposition did not converge");
  }
  // Eigen returns ascending eigenvalues; store descending.
  NoiseSubspace ns;
  ns.m = m;
  ns.d = d;
  ns.eigenvalues = eig.eigenvalues().reverse();
  const double trace = std::abs(rss.matrix.trace().real());
  ns.psd_warning = ns.eigenvalues.size() > 0 && ns.eigenvalues(m - 1) < -1e-10 * trace;

  const int b = m - d;
  ns.basis.resize(m, b);
  for (int c = 0; c < b; ++c) {
    // Column c holds the (d + c)-th largest eigenvalue's eigenvector.
    CVector v = eig.eigenvectors().col(m - 1 - (d + c));
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (std::abs(v(k)) > 1e-8 * scale) {
        v *= std::conj(v(k)) / std::abs(v(k));
        break;
      }
    }
    ns.basis.col(c) = v;
  }
  return ns;
}

NoiseSubspace coarray_noise_subspace(const CMatrix& covariance, const SensorSet& array, int d) {
  return noise_subspace(spatial_smooth(coarray_vectorize(covariance, array)), d);
}

}  // namespace subdoa
