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
#include <utility>
#include <vector>

#include "subdoa/geometry.hpp"
#include "subdoa/signal_model.hpp"
#include "subdoa/types.hpp"

namespace subdoa {

/// How the calibration phases relate to the directions. `geometric` means
/// h_{l,d} = exp(j pi offset_l theta_d), so d/dtheta also moves h; `fixed`
/// treats h as independent of theta.
enum class CalibrationModel { geometric, fixed };

enum class ParamBlock { theta, power, noise, nu, eta };

/// Position of each parameter inside
/// phi = [theta, p, sigma^2, nu_2..nu_L, eta_2..eta_L].
/// Subarray indices are zero-based; calibration blocks exist for l >= 1.
struct ParameterIndex {
  int sources = 0;
  int subarrays = 1;

  int size() const noexcept { return 2 * sources + 1 + 2 * (subarrays - 1) * sources; }
  /// First index and length of a block.
  std::pair<int, int> range(ParamBlock block, int l = 0) const;
  int at(ParamBlock block, int l, int i) const { return range(block, l).first + i; }
};

/// Real parameter vector of the partially calibrated model.
struct ParameterVector {
  std::vector<double> thetas;
  std::vector<double> powers;
  double noise_var = 1.0;
  RMatrix nu;   // (L-1) x D
  RMatrix eta;  // (L-1) x D

  static ParameterVector from_scene(const SceneConfig& scene, const CMatrix& h);
  /// The full L x D calibration matrix with the reference row of ones.
  CMatrix calibration() const;
  RVector flatten() const;
};

/// Everything the derivative and FIM formulas share, evaluated once at the
/// true parameter point.
class CrlbModel {
 public:
  CrlbModel(const SubarrayLayout& layout, const SceneConfig& scene, const CMatrix& h,
            CalibrationModel model);

  const SubarrayLayout& layout() const noexcept { return layout_; }
  CalibrationModel calibration_model() const noexcept { return model_; }
  ParameterIndex index() const noexcept { return {sources(), subarrays()}; }
  int sources() const noexcept { return static_cast<int>(powers_.size()); }
  int subarrays() const noexcept { return static_cast<int>(layout_.count()); }

  const CMatrix& w() const noexcept { return w_; }           // N x D
  const CMatrix& dw() const noexcept { return dw_; }         // dW/dtheta, column d
  const CMatrix& manifold() const noexcept { return a_; }    // stacked local A
  const RVector& powers() const noexcept { return powers_; }
  double noise_var() const noexcept { return noise_var_; }
  const CMatrix& covariance() const noexcept { return r_; }
  const CMatrix& covariance_inv() const noexcept { return r_inv_; }

  /// P_{E_l} A: the manifold restricted to the rows of subarray l.
  CMatrix selected_manifold(int l) const;

 private:
  SubarrayLayout layout_;
  CalibrationModel model_;
  CMatrix w_, dw_, a_;
  RVector powers_;
  double noise_var_;
  CMatrix r_, r_inv_;
};

CMatrix derivative_wrt_theta(const CrlbModel& model, int i);
CMatrix derivative_wrt_power(const CrlbModel& model, int i);
CMatrix derivative_wrt_noise(const CrlbModel& model);
/// l is the zero-based subarray index and must not be the reference (0).
CMatrix derivative_wrt_nu(const CrlbModel& model, int l, int i);
CMatrix derivative_wrt_eta(const CrlbModel& model, int l, int i);

struct FimMatrix {
  RMatrix matrix;
  ParameterIndex index;
  /// Largest imaginary part discarded from a complex-valued block, relative
  /// to that block's norm.
  double imag_residue = 0.0;

  RMatrix block(ParamBlock a, int la, ParamBlock b, int lb) const;
};

FimMatrix assemble_fim(const CrlbModel& model, int snapshots);
FimMatrix assemble_fim(const SubarrayLayout& layout, const SceneConfig& scene,
                       const CalibrationSet& calib, int snapshots,
                       CalibrationModel model = CalibrationModel::geometric);

struct CrlbResult {
  RMatrix theta_bound;                 // D x D
  std::vector<double> per_source_std;  // sqrt of the diagonal
};

/// DOA block of the inverse FIM through the Schur complement of the
/// nuisance block.
CrlbResult crlb_theta(const FimMatrix& fim);

/// Fully calibrated array with uncorrelated sources: one subarray, FIM over
/// [theta, p, sigma^2].
CrlbResult crlb_fc_up(const SensorSet& full_array, const SceneConfig& scene, int snapshots);

}  // namespace subdoa
