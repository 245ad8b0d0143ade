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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "subdoa/crlb.hpp"
#include "subdoa/signal_model.hpp"
#include "test_util.hpp"

// Independent oracles for the Fisher information: finite differences of the
// model covariance and the trace formula built from the derivative matrices.
namespace subdoa::test {

struct Case {
  SubarrayLayout layout;
  SceneConfig scene;
  CMatrix h;
  CalibrationModel model;
};

inline Case mra7_case(double snr_db = 0.0) {
  SubarrayLayout layout = test::mra7_layout();
  SceneConfig scene = test::eleven_source_scene(snr_db);
  CMatrix h = default_calibration(layout, scene.thetas).h();
  return {layout, scene, h, CalibrationModel::geometric};
}

// Random type-II layouts and scenes. Even cases use the geometric
// calibration, odd ones a fixed random calibration.
inline Case random_case(int k) {
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(k));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<SensorSet> refs{generate_mra(4), generate_mra(5), generate_naq2(2, 2),
                                    generate_naq2(3, 2), snaq2_7()};
  const SensorSet& ref = refs[rng() % refs.size()];
  const int l = 2 + static_cast<int>(rng() % 2);
  const int mu = 1 + static_cast<int>(rng() % 6);
  SubarrayLayout layout = build_type2(ref, l, mu);
  const int d = 1 + static_cast<int>(rng() % 4);
  SceneConfig scene;
  for (int i = 0; i < d; ++i) scene.thetas.push_back(-0.9 + 1.8 * (i + 0.2 + 0.6 * u(rng)) / d);
  for (int i = 0; i < d; ++i) scene.powers.push_back(0.5 + 1.5 * u(rng));
  scene.noise_var = 0.1 + 1.9 * u(rng);
  scene.snapshots = 100;
  CMatrix h;
  CalibrationModel model;
  if (k % 2 == 0) {
    h = default_calibration(layout, scene.thetas).h();
    model = CalibrationModel::geometric;
  } else {
    h = CMatrix::Ones(l, d);
    for (int r = 1; r < l; ++r) {
      for (int c = 0; c < d; ++c) h(r, c) = std::polar(1.0, 2.0 * kPi * u(rng));
    }
    model = CalibrationModel::fixed;
  }
  return {layout, scene, h, model};
}

inline std::vector<Case> all_cases() {
  std::vector<Case> cases{mra7_case()};
  for (int k = 0; k < 20; ++k) cases.push_back(random_case(k));
  return cases;
}

// Analytic derivative of R for flat parameter index k.
inline CMatrix analytic_derivative(const CrlbModel& m, int k) {
  const ParameterIndex idx = m.index();
  const int d = idx.sources;
  if (k < d) return derivative_wrt_theta(m, k);
  if (k < 2 * d) return derivative_wrt_power(m, k - d);
  if (k == 2 * d) return derivative_wrt_noise(m);
  const int r = k - (2 * d + 1);
  const int per = (idx.subarrays - 1) * d;
  if (r < per) return derivative_wrt_nu(m, 1 + r / d, r % d);
  return derivative_wrt_eta(m, 1 + (r - per) / d, (r - per) % d);
}

// R evaluated at a flat parameter vector.
inline CMatrix covariance_at(const Case& c, const RVector& phi) {
  const ParameterIndex idx{static_cast<int>(c.scene.thetas.size()),
                           static_cast<int>(c.layout.count())};
  const int d = idx.sources;
  std::vector<double> th(phi.data(), phi.data() + d);
  std::vector<double> p(phi.data() + d, phi.data() + 2 * d);
  CMatrix h = c.h;
  for (int l = 1; l < idx.subarrays; ++l) {
    for (int i = 0; i < d; ++i) {
      h(l, i) = cplx(phi(idx.at(ParamBlock::nu, l, i)), phi(idx.at(ParamBlock::eta, l, i)));
    }
  }
  if (c.model == CalibrationModel::geometric) {
    // The calibration moves with theta relative to the nominal point.
    for (std::size_t l = 1; l < c.layout.count(); ++l) {
      const double shift = c.layout.offset(l) - c.layout.offset(0);
      for (int i = 0; i < d; ++i) {
        h(static_cast<Eigen::Index>(l), i) *=
            std::polar(1.0, kPi * shift * (th[static_cast<std::size_t>(i)] -
                                           c.scene.thetas[static_cast<std::size_t>(i)]));
      }
    }
  }
  return model_covariance(c.layout, th, p, phi(2 * d), h);
}

inline RMatrix trace_fim(const CrlbModel& m, int t, double* max_imag) {
  const int n = m.index().size();
  std::vector<CMatrix> g;
  for (int k = 0; k < n; ++k) g.push_back(m.covariance_inv() * analytic_derivative(m, k));
  RMatrix f(n, n);
  *max_imag = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx v = static_cast<double>(t) * (g[static_cast<std::size_t>(i)] *
                                               g[static_cast<std::size_t>(j)]).trace();
      f(i, j) = v.real();
      *max_imag = std::max(*max_imag, std::abs(v.imag()) / std::max(1.0, std::abs(v)));
    }
  }
  return f;
}

// Largest entry error of a FIM against the trace oracle, each entry scaled by
// max(|oracle|, sqrt(F_ii F_jj)).
inline double trace_oracle_error(const RMatrix& fim, const RMatrix& oracle) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fim.rows(); ++i) {
    for (Eigen::Index j = 0; j < fim.cols(); ++j) {
      const double scale =
          std::max(std::abs(oracle(i, j)), std::sqrt(oracle(i, i) * oracle(j, j)));
      if (scale > 0.0) worst = std::max(worst, std::abs(fim(i, j) - oracle(i, j)) / scale);
    }
  }
  return worst;
}

// Largest relative error between analytic and central-difference
// derivatives of R over every parameter.
inline double finite_difference_error(const Case& c, double step = 1e-6) {
  const CrlbModel m(c.layout, c.scene, c.h, c.model);
  const RVector phi = ParameterVector::from_scene(c.scene, c.h).flatten();
  double worst = 0.0;
  for (int k = 0; k < phi.size(); ++k) {
    RVector up = phi, down = phi;
    up(k) += step;
    down(k) -= step;
    const CMatrix fd = (covariance_at(c, up) - covariance_at(c, down)) / (2.0 * step);
    worst = std::max(worst, rel_err(analytic_derivative(m, k), fd));
  }
  return worst;
}

}  // namespace subdoa::test
