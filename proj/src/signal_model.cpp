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

#include "subdoa/signal_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "subdoa/errors.hpp"

namespace subdoa {

void SceneConfig::validate() const {
  if (powers.size() != thetas.size()) {
    throw Error(Errc::dimension_mismatch, "one power per source is required");
  }
  for (std::size_t d = 0; d < thetas.size(); ++d) {
    if (!(thetas[d] >= -1.0 && thetas[d] < 1.0)) {
      throw Error(Errc::invalid_argument, "directions must lie in [-1, 1)");
    }
    if (d > 0 && thetas[d] <= thetas[d - 1]) {
      throw Error(Errc::invalid_argument, "directions must be strictly ascending");
    }
    if (!(powers[d] > 0.0)) throw Error(Errc::invalid_argument, "source powers must be positive");
  }
  if (!(noise_var > 0.0)) throw Error(Errc::invalid_argument, "noise variance must be positive");
  if (snapshots < 1) throw Error(Errc::invalid_argument, "need at least one snapshot");
}

SceneConfig scene_from_snr(std::vector<double> thetas, double snr_db, int snapshots,
                           std::uint64_t seed) {
  SceneConfig s;
  s.powers.assign(thetas.size(), 1.0);
  s.thetas = std::move(thetas);
  s.noise_var = std::pow(10.0, -snr_db / 10.0);
  s.snapshots = snapshots;
  s.seed = seed;
  return s;
}

CalibrationSet::CalibrationSet(CMatrix h) : h_(std::move(h)) {
  constexpr double tol = 1e-9;
  for (Eigen::Index d = 0; d < h_.cols(); ++d) {
    if (h_.rows() > 0 && std::abs(h_(0, d) - cplx(1.0, 0.0)) > tol) {
      throw Error(Errc::invalid_argument, "reference subarray calibration must be 1");
    }
    for (Eigen::Index l = 0; l < h_.rows(); ++l) {
      if (std::abs(std::abs(h_(l, d)) - 1.0) > tol) {
        throw Error(Errc::invalid_argument, "calibration phases must have unit modulus");
      }
    }
  }
}

CMatrix SnapshotData::stacked() const {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  CMatrix out(rows, static_cast<Eigen::Index>(snapshots()));
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

CVector steering_vector(const SensorSet& array, double theta) {
  CVector a(static_cast<Eigen::Index>(array.size()));
  for (std::size_t k = 0; k < array.size(); ++k) {
    a(static_cast<Eigen::Index>(k)) = std::polar(1.0, kPi * array[k] * theta);
  }
  return a;
}

CMatrix steering_matrix(const SensorSet& array, std::span<const double> thetas) {
  CMatrix a(static_cast<Eigen::Index>(array.size()), static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t d = 0; d < thetas.size(); ++d) {
    a.col(static_cast<Eigen::Index>(d)) = steering_vector(array, thetas[d]);
  }
  return a;
}

CalibrationSet default_calibration(const SubarrayLayout& layout, std::span<const double> thetas) {
  if (layout.kind() == LayoutKind::custom) {
    throw Error(Errc::unsupported_layout,
                "geometric calibration needs a type-I or type-II layout");
  }
  const auto l_count = static_cast<Eigen::Index>(layout.count());
  CMatrix h(l_count, static_cast<Eigen::Index>(thetas.size()));
  for (Eigen::Index l = 0; l < l_count; ++l) {
    // For type-II layouts offset(l) == l * (mu + kappa).
    const double shift = layout.offset(static_cast<std::size_t>(l)) - layout.offset(0);
    for (std::size_t d = 0; d < thetas.size(); ++d) {
      h(l, static_cast<Eigen::Index>(d)) = std::polar(1.0, kPi * shift * thetas[d]);
    }
  }
  return CalibrationSet(std::move(h));
}

CMatrix mixing_matrix(const SubarrayLayout& layout, std::span<const double> thetas,
                      const CMatrix& h) {
  const auto n = static_cast<Eigen::Index>(layout.total_sensors());
  const auto d_count = static_cast<Eigen::Index>(thetas.size());
  if (h.rows() != static_cast<Eigen::Index>(layout.count()) || h.cols() != d_count) {
    throw Error(Errc::dimension_mismatch, "calibration matrix must be L x D");
  }
  CMatrix w(n, d_count);
  for (std::size_t l = 0; l < layout.count(); ++l) {
    const auto rows = static_cast<Eigen::Index>(layout.subarray(l).size());
    const auto r0 = static_cast<Eigen::Index>(layout.row_offset(l));
    const CMatrix a_l = steering_matrix(layout.local(l), thetas);
    w.middleRows(r0, rows) = a_l * h.row(static_cast<Eigen::Index>(l)).asDiagonal();
  }
  return w;
}

CMatrix model_covariance(const SubarrayLayout& layout, std::span<const double> thetas,
                         std::span<const double> powers, double noise_var, const CMatrix& h) {
  if (powers.size() != thetas.size()) {
    throw Error(Errc::dimension_mismatch, "one power per source is required");
  }
  const CMatrix w = mixing_matrix(layout, thetas, h);
  const RVector p = Eigen::Map<const RVector>(powers.data(), static_cast<Eigen::Index>(powers.size()));
  CMatrix r = w * p.asDiagonal() * w.adjoint();
  r.diagonal().array() += noise_var;
  return r;
}

CMatrix exact_subarray_covariance(const SensorSet& array_l, const SceneConfig& scene) {
  const CMatrix a = steering_matrix(array_l, scene.thetas);
  const RVector p =
      Eigen::Map<const RVector>(scene.powers.data(), static_cast<Eigen::Index>(scene.powers.size()));
  CMatrix r = a * p.asDiagonal() * a.adjoint();
  r.diagonal().array() += scene.noise_var;
  return r;
}

CMatrix exact_full_covariance(const SubarrayLayout& layout, const SceneConfig& scene,
                              const CalibrationSet& calib) {
  if (calib.subarrays() != layout.count() || calib.sources() != scene.num_sources()) {
    throw Error(Errc::dimension_mismatch, "calibration does not match layout and scene");
  }
  return model_covariance(layout, scene.thetas, scene.powers, scene.noise_var, calib.h());
}

SnapshotData simulate(const SubarrayLayout& layout, const SceneConfig& scene,
                      const CalibrationSet& calib) {
  scene.validate();
  if (calib.subarrays() != layout.count() || calib.sources() != scene.num_sources()) {
    throw Error(Errc::dimension_mismatch, "calibration does not match layout and scene");
  }
  const auto t = static_cast<Eigen::Index>(scene.snapshots);
  const auto d_count = static_cast<Eigen::Index>(scene.num_sources());

  std::mt19937_64 rng(scene.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half = std::sqrt(0.5);

  // Sources first, then noise subarray by subarray, column-major.
  CMatrix s(d_count, t);
  for (Eigen::Index c = 0; c < t; ++c) {
    for (Eigen::Index d = 0; d < d_count; ++d) {
      const double amp = half * std::sqrt(scene.powers[static_cast<std::size_t>(d)]);
      const double re = normal(rng);
      const double im = normal(rng);
      s(d, c) = cplx(amp * re, amp * im);
    }
  }

  const CMatrix w = mixing_matrix(layout, scene.thetas, calib.h());
  const double sigma = half * std::sqrt(scene.noise_var);
  SnapshotData data;
  data.blocks.reserve(layout.count());
  for (std::size_t l = 0; l < layout.count(); ++l) {
    const auto rows = static_cast<Eigen::Index>(layout.subarray(l).size());
    CMatrix x = w.middleRows(static_cast<Eigen::Index>(layout.row_offset(l)), rows) * s;
    for (Eigen::Index c = 0; c < t; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double re = normal(rng);
        const double im = normal(rng);
        x(r, c) += cplx(sigma * re, sigma * im);
      }
    }
    data.blocks.push_back(std::move(x));
  }
  return data;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  // splitmix64 finalizer applied to each coordinate in turn.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ a);
  h = mix(h ^ b);
  return h;
}

}  // namespace subdoa
