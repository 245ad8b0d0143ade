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

#include "subdoa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

// LAPACKE must see the C++ complex type before its own declarations.
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "subdoa/errors.hpp"

namespace subdoa {

namespace {

// Columns are coarray steering vectors of length m at every grid point,
// built by repeated multiplication to avoid m * g transcendental calls.
CMatrix grid_steering(int m, const std::vector<double>& grid) {
  CMatrix a(m, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx z = std::polar(1.0, kPi * grid[i]);
    cplx acc(1.0, 0.0);
    auto col = a.col(static_cast<Eigen::Index>(i));
    for (int k = 0; k < m; ++k) {
      col(k) = acc;
      acc *= z;
    }
  }
  return a;
}

std::vector<double> pick_peaks(const std::vector<double>& grid, const std::vector<double>& values,
                               int d) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    // A two-point plateau (a peak centred between grid points) counts once.
    if (values[i] > values[i - 1] && values[i] >= values[i + 1]) peaks.push_back(i);
  }
  if (static_cast<int>(peaks.size()) < d) {
    throw Error(Errc::insufficient_peaks, "found " + std::to_string(peaks.size()) +
                                              " spectral peaks, need " + std::to_string(d));
  }
  std::partial_sort(peaks.begin(), peaks.begin() + d, peaks.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  std::vector<double> est;
  est.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) est.push_back(grid[peaks[static_cast<std::size_t>(k)]]);
  std::sort(est.begin(), est.end());
  return est;
}

void check_subspaces(std::span<const NoiseSubspace> subspaces, int d) {
  if (subspaces.empty()) throw Error(Errc::invalid_argument, "no noise subspaces");
  for (const auto& ns : subspaces) {
    if (d >= ns.m) {
      throw Error(Errc::too_many_sources,
                  "D = " + std::to_string(d) + " needs M > D on every subarray");
    }
  }
}

// Takes up to d roots closest to the unit circle. A root that is the
// conjugate-reciprocal partner of one already taken is skipped: rounding can
// split a double root on the circle into two nearby roots that both pass the
// modulus test but describe the same direction.
int select_roots(std::vector<cplx> pool, int d, std::vector<cplx>& out) {
  constexpr double partner_tol = 1e-6;
  std::stable_sort(pool.begin(), pool.end(), [](const cplx& a, const cplx& b) {
    return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b));
  });
  out.clear();
  for (const cplx& z : pool) {
    if (static_cast<int>(out.size()) == d) break;
    const bool partner = std::any_of(out.begin(), out.end(), [&](const cplx& s) {
      return std::abs(z - 1.0 / std::conj(s)) <= partner_tol;
    });
    if (!partner) out.push_back(z);
  }
  return static_cast<int>(out.size());
}

// Roots within this distance of the unit circle are numerically double
// roots of Q, known only to about sqrt(eps). They are simple roots of Q', so
// a few Newton steps on Q' restore full precision without moving roots that
// are genuinely off the circle.
constexpr double kDoubleRootBand = 1e-6;

cplx polish_double_root(const CVector& c, cplx z) {
  const cplx start = z;
  for (int it = 0; it < 8; ++it) {
    cplx d1(0, 0), d2(0, 0);
    for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
      d2 = d2 * z + d1;
      d1 = d1 * z + static_cast<double>(k) * c(k);
    }
    // Horner on the derivative coefficients: d1 = Q'(z), d2 = Q''(z).
    if (d2 == cplx(0, 0)) break;
    const cplx step = d1 / d2;
    z -= step;
    if (std::abs(step) <= 1e-16) break;
  }
  return std::abs(z - start) <= kDoubleRootBand ? z : start;
}

}  // namespace

std::vector<double> uniform_grid(int grid_size) {
  if (grid_size < 3) throw Error(Errc::invalid_argument, "grid needs at least 3 points");
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 1; i <= grid_size; ++i) {
    grid[static_cast<std::size_t>(i - 1)] = -1.0 + 2.0 * i / grid_size;
  }
  return grid;
}

CVector coarray_steering(int m, double theta) {
  if (m < 1) throw Error(Errc::invalid_argument, "steering length must be positive");
  CVector a(m);
  for (int k = 0; k < m; ++k) a(k) = std::polar(1.0, kPi * k * theta);
  return a;
}

double gca_denominator(std::span<const NoiseSubspace> subspaces, double theta) {
  double acc = 0.0;
  for (const auto& ns : subspaces) {
    acc += (ns.basis.adjoint() * coarray_steering(ns.m, theta)).squaredNorm();
  }
  return acc;
}

SpectrumResult gca_music(std::span<const NoiseSubspace> subspaces, int grid_size, int d) {
  check_subspaces(subspaces, d);
  SpectrumResult res;
  res.grid = uniform_grid(grid_size);
  RVector denom = RVector::Zero(grid_size);

  int cached_m = -1;
  CMatrix steer;
  for (const auto& ns : subspaces) {
    if (ns.m != cached_m) {
      steer = grid_steering(ns.m, res.grid);
      cached_m = ns.m;
    }
    const CMatrix proj = ns.basis.adjoint() * steer;
    denom += proj.colwise().squaredNorm().transpose();
  }
  res.values.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) res.values[static_cast<std::size_t>(i)] = 1.0 / denom(i);
  res.estimates = pick_peaks(res.grid, res.values, d);
  return res;
}

CMatrix build_global_projection(std::span<const NoiseSubspace> subspaces) {
  if (subspaces.empty()) throw Error(Errc::invalid_argument, "no noise subspaces");
  const auto largest = std::max_element(
      subspaces.begin(), subspaces.end(),
      [](const NoiseSubspace& a, const NoiseSubspace& b) { return a.m < b.m; });
  CMatrix p = largest->projector();
  for (auto it = subspaces.begin(); it != subspaces.end(); ++it) {
    if (it == largest) continue;
    p.bottomRightCorner(it->m, it->m) += it->projector();
  }
  return p;
}

CVector projection_polynomial(const CMatrix& projection) {
  const auto m = projection.rows();
  CVector c = CVector::Zero(2 * m - 1);
  // Q(z) = sum_{n,k} z^{-n} P(n,k) z^{k}
  for (Eigen::Index n = 0; n < m; ++n) {
    for (Eigen::Index k = 0; k < m; ++k) c(k - n + m - 1) += projection(n, k);
  }
  return c;
}

std::vector<cplx> polynomial_roots(const CVector& coeffs) {
  Eigen::Index deg = coeffs.size() - 1;
  const double scale = coeffs.cwiseAbs().maxCoeff();
  while (deg > 0 && std::abs(coeffs(deg)) <= 1e-14 * scale) --deg;
  if (deg < 1) return {};
  CMatrix companion = CMatrix::Zero(deg, deg);
  companion.block(1, 0, deg - 1, deg - 1).setIdentity();
  for (Eigen::Index j = 0; j < deg; ++j) companion(j, deg - 1) = -coeffs(j) / coeffs(deg);
  // The companion matrix is already upper Hessenberg, so LAPACK's Hessenberg
  // QR runs on it directly.
  std::vector<cplx> ev(static_cast<std::size_t>(deg));
  cplx unused;
  const lapack_int info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', static_cast<lapack_int>(deg), 1,
                                         static_cast<lapack_int>(deg), companion.data(),
                                         static_cast<lapack_int>(deg), ev.data(), &unused, 1);
  if (info != 0) throw Error(Errc::degenerate, "companion eigenvalues did not converge");
  return ev;
}

RootResult gca_rmusic(std::span<const NoiseSubspace> subspaces, int d) {
  check_subspaces(subspaces, d);
  RootResult res;
  const CVector coeffs = projection_polynomial(build_global_projection(subspaces));
  res.roots_all = polynomial_roots(coeffs);

  constexpr double inside_tol = 1e-9;
  std::vector<cplx> candidates;
  for (const cplx& z : res.roots_all) {
    if (std::abs(z) <= 1.0 + inside_tol) candidates.push_back(z);
  }
  if (select_roots(candidates, d, res.selected) < d) {
    res.root_deficient = true;
    if (select_roots(res.roots_all, d, res.selected) < d) {
      throw Error(Errc::degenerate, "polynomial has fewer roots than sources");
    }
  }
  for (cplx& z : res.selected) {
    if (std::abs(1.0 - std::abs(z)) <= kDoubleRootBand) z = polish_double_root(coeffs, z);
    res.estimates.push_back(std::arg(z) / kPi);
  }
  std::sort(res.estimates.begin(), res.estimates.end());
  return res;
}

std::vector<NoiseSubspace> subarray_noise_subspaces(const SnapshotData& data,
                                                    const SubarrayLayout& layout, int d) {
  if (data.blocks.size() != layout.count()) {
    throw Error(Errc::dimension_mismatch, "one data block per subarray is required");
  }
  std::vector<NoiseSubspace> out;
  out.reserve(layout.count());
  for (std::size_t l = 0; l < layout.count(); ++l) {
    out.push_back(coarray_noise_subspace(sample_covariance(data.blocks[l]), layout.local(l), d));
  }
  return out;
}

SpectrumResult ss_music_baseline(const SnapshotData& full_data, const SubarrayLayout& layout,
                                 int grid_size, int d) {
  if (full_data.blocks.size() != layout.count()) {
    throw Error(Errc::dimension_mismatch, "one data block per subarray is required");
  }
  const SensorSet full = layout.full_array();
  const int limit = difference_coarray(full).max_contiguous_lag();
  if (d > limit) {
    throw Error(Errc::insufficient_peaks, "the full array resolves at most " +
                                              std::to_string(limit) + " sources");
  }
  const NoiseSubspace ns = coarray_noise_subspace(sample_covariance(full_data.stacked()), full, d);
  return gca_music(std::span<const NoiseSubspace>(&ns, 1), grid_size, d);
}

}  // namespace subdoa
