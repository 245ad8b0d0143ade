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

#include "subdoa/crlb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "subdoa/errors.hpp"

namespace subdoa {

std::pair<int, int> ParameterIndex::range(ParamBlock block, int l) const {
  const int d = sources;
  switch (block) {
    case ParamBlock::theta: return {0, d};
    case ParamBlock::power: return {d, d};
    case ParamBlock::noise: return {2 * d, 1};
    case ParamBlock::nu:
    case ParamBlock::eta: {
      if (l < 1 || l >= subarrays) {
        throw Error(Errc::index_out_of_range, "calibration block for subarray " +
                                                  std::to_string(l) + " does not exist");
      }
      const int base = block == ParamBlock::nu ? 2 * d + 1 : 2 * d + 1 + (subarrays - 1) * d;
      return {base + (l - 1) * d, d};
    }
  }
  return {0, 0};
}

ParameterVector ParameterVector::from_scene(const SceneConfig& scene, const CMatrix& h) {
  ParameterVector v;
  v.thetas = scene.thetas;
  v.powers = scene.powers;
  v.noise_var = scene.noise_var;
  const auto rest = h.rows() - 1;
  v.nu = h.bottomRows(rest).real();
  v.eta = h.bottomRows(rest).imag();
  return v;
}

CMatrix ParameterVector::calibration() const {
  CMatrix h(nu.rows() + 1, static_cast<Eigen::Index>(thetas.size()));
  h.row(0).setOnes();
  h.bottomRows(nu.rows()) = nu.cast<cplx>() + kJ * eta.cast<cplx>();
  return h;
}

RVector ParameterVector::flatten() const {
  const ParameterIndex idx{static_cast<int>(thetas.size()), static_cast<int>(nu.rows()) + 1};
  RVector out(idx.size());
  for (int i = 0; i < idx.sources; ++i) {
    out(idx.at(ParamBlock::theta, 0, i)) = thetas[static_cast<std::size_t>(i)];
    out(idx.at(ParamBlock::power, 0, i)) = powers[static_cast<std::size_t>(i)];
  }
  out(idx.at(ParamBlock::noise, 0, 0)) = noise_var;
  for (int l = 1; l < idx.subarrays; ++l) {
    for (int i = 0; i < idx.sources; ++i) {
      out(idx.at(ParamBlock::nu, l, i)) = nu(l - 1, i);
      out(idx.at(ParamBlock::eta, l, i)) = eta(l - 1, i);
    }
  }
  return out;
}

CrlbModel::CrlbModel(const SubarrayLayout& layout, const SceneConfig& scene, const CMatrix& h,
                     CalibrationModel model)
    : layout_(layout), model_(model), noise_var_(scene.noise_var) {
  if (scene.powers.size() != scene.thetas.size()) {
    throw Error(Errc::dimension_mismatch, "one power per source is required");
  }
  if (!(scene.noise_var > 0.0)) {
    throw Error(Errc::singular_covariance, "noise variance must be positive for the FIM");
  }
  const auto n = static_cast<Eigen::Index>(layout.total_sensors());
  const auto d = static_cast<Eigen::Index>(scene.num_sources());
  powers_ = Eigen::Map<const RVector>(scene.powers.data(), d);
  w_ = mixing_matrix(layout, scene.thetas, h);
  a_.resize(n, d);
  dw_.resize(n, d);
  for (std::size_t l = 0; l < layout.count(); ++l) {
    const SensorSet local = layout.local(l);
    const auto r0 = static_cast<Eigen::Index>(layout.row_offset(l));
    const double shift =
        model == CalibrationModel::geometric ? layout.offset(l) - layout.offset(0) : 0.0;
    a_.middleRows(r0, static_cast<Eigen::Index>(local.size())) =
        steering_matrix(local, scene.thetas);
    for (std::size_t k = 0; k < local.size(); ++k) {
      const auto row = r0 + static_cast<Eigen::Index>(k);
      dw_.row(row) = kJ * kPi * (local[k] + shift) * w_.row(row);
    }
  }
  r_ = w_ * powers_.asDiagonal() * w_.adjoint();
  r_.diagonal().array() += noise_var_;
  Eigen::LLT<CMatrix> llt(r_);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::singular_covariance, "model covariance is not positive definite");
  }
  r_inv_ = llt.solve(CMatrix::Identity(n, n));
  // Exact Hermitian symmetry keeps the real-valued FIM blocks real to
  // rounding even when R is ill-conditioned at high SNR.
  r_inv_ = (0.5 * (r_inv_ + r_inv_.adjoint())).eval();
}

CMatrix CrlbModel::selected_manifold(int l) const {
  if (l < 0 || l >= subarrays()) {
    throw Error(Errc::index_out_of_range, "subarray " + std::to_string(l) + " does not exist");
  }
  CMatrix u = CMatrix::Zero(a_.rows(), a_.cols());
  const auto r0 = static_cast<Eigen::Index>(layout_.row_offset(static_cast<std::size_t>(l)));
  const auto rows = static_cast<Eigen::Index>(layout_.subarray(static_cast<std::size_t>(l)).size());
  u.middleRows(r0, rows) = a_.middleRows(r0, rows);
  return u;
}

namespace {

void check_source(const CrlbModel& model, int i) {
  if (i < 0 || i >= model.sources()) {
    throw Error(Errc::index_out_of_range, "source index " + std::to_string(i) + " out of range");
  }
}

void check_calibration_subarray(const CrlbModel& model, int l) {
  if (l == 0) {
    throw Error(Errc::reference_subarray, "the reference subarray has no calibration parameters");
  }
  if (l < 0 || l >= model.subarrays()) {
    throw Error(Errc::index_out_of_range, "subarray " + std::to_string(l) + " out of range");
  }
}

// x p w^H + w p x^H for column vectors x, w.
CMatrix symmetric_outer(const CVector& x, const CVector& w, double p) {
  const CMatrix t = p * x * w.adjoint();
  return t + t.adjoint();
}

}  // namespace

CMatrix derivative_wrt_theta(const CrlbModel& model, int i) {
  check_source(model, i);
  return symmetric_outer(model.dw().col(i), model.w().col(i), model.powers()(i));
}

CMatrix derivative_wrt_power(const CrlbModel& model, int i) {
  check_source(model, i);
  return model.w().col(i) * model.w().col(i).adjoint();
}

CMatrix derivative_wrt_noise(const CrlbModel& model) {
  const auto n = model.w().rows();
  return CMatrix::Identity(n, n);
}

CMatrix derivative_wrt_nu(const CrlbModel& model, int l, int i) {
  check_calibration_subarray(model, l);
  check_source(model, i);
  return symmetric_outer(model.selected_manifold(l).col(i), model.w().col(i), model.powers()(i));
}

CMatrix derivative_wrt_eta(const CrlbModel& model, int l, int i) {
  check_calibration_subarray(model, l);
  check_source(model, i);
  const CMatrix t =
      model.powers()(i) * model.selected_manifold(l).col(i) * model.w().col(i).adjoint();
  return kJ * (t - t.adjoint());
}

RMatrix FimMatrix::block(ParamBlock a, int la, ParamBlock b, int lb) const {
  const auto [ra, na] = index.range(a, la);
  const auto [rb, nb] = index.range(b, lb);
  return matrix.block(ra, rb, na, nb);
}

namespace {

CMatrix hermitian(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Keeps the real part of a block that is real in exact arithmetic and
// tracks the largest imaginary residue thrown away. Blocks that vanish in
// exact arithmetic would make a per-block ratio meaningless, so the residue
// is later scaled by the norm of the whole FIM.
class RealBlocks {
 public:
  RMatrix take(const CMatrix& block) {
    imag_ = std::max(imag_, block.imag().norm());
    return block.real();
  }
  double residue(const RMatrix& fim) const {
    const double norm = fim.norm();
    return norm > 0.0 ? imag_ / norm : 0.0;
  }

 private:
  double imag_ = 0.0;
};

}  // namespace

FimMatrix assemble_fim(const CrlbModel& model, int snapshots) {
  if (snapshots < 1) throw Error(Errc::invalid_argument, "need at least one snapshot");
  const double t = snapshots;
  const ParameterIndex idx = model.index();
  const int d = idx.sources;
  const int l_count = idx.subarrays;

  const CMatrix& w = model.w();
  const CMatrix& dw = model.dw();
  const CMatrix& ri = model.covariance_inv();
  const auto rs = model.powers().asDiagonal();

  // R^-1 W = W (s2 I + Rs W^H W)^-1 avoids the cancellation that a direct
  // product with R^-1 suffers at high SNR.
  const CMatrix gram = w.adjoint() * w;
  const CMatrix kx = (model.noise_var() * CMatrix::Identity(d, d) + rs * gram)
                         .partialPivLu()
                         .solve(CMatrix::Identity(d, d));
  const CMatrix ri_w = w * kx;
  const CMatrix ri_d = ri * dw;
  const CMatrix wrw = hermitian(gram * kx);      // W^H R^-1 W
  const CMatrix wrd = kx.adjoint() * (w.adjoint() * dw);  // W^H R^-1 D
  const CMatrix drd = hermitian(dw.adjoint() * ri_d);       // D^H R^-1 D
  const CMatrix drw_rs = wrd.adjoint() * rs;     // D^H R^-1 W Rs
  const CMatrix rs_wrd = rs * wrd;               // Rs W^H R^-1 D
  const CMatrix rs_wrw = rs * wrw;               // Rs W^H R^-1 W
  const CMatrix g2 = rs_wrw * rs;                // Rs W^H R^-1 W Rs

  std::vector<CMatrix> u(static_cast<std::size_t>(l_count));
  std::vector<CMatrix> ri_u(static_cast<std::size_t>(l_count));
  for (int l = 1; l < l_count; ++l) {
    u[static_cast<std::size_t>(l)] = model.selected_manifold(l);
    ri_u[static_cast<std::size_t>(l)] = ri * u[static_cast<std::size_t>(l)];
  }

  FimMatrix fim;
  fim.index = idx;
  fim.matrix = RMatrix::Zero(idx.size(), idx.size());
  RealBlocks real;
  auto put = [&](ParamBlock a, int la, ParamBlock b, int lb, const RMatrix& value) {
    const auto [ra, na] = idx.range(a, la);
    const auto [rb, nb] = idx.range(b, lb);
    fim.matrix.block(ra, rb, na, nb) = value;
    if (ra != rb) fim.matrix.block(rb, ra, nb, na) = value.transpose();
  };

  using PB = ParamBlock;
  // theta-theta
  put(PB::theta, 0, PB::theta, 0,
      2.0 * t *
          (rs_wrd.cwiseProduct(rs_wrd.transpose()) + g2.cwiseProduct(drd.transpose())).real());
  // p-p
  put(PB::power, 0, PB::power, 0, real.take(t * wrw.cwiseProduct(wrw.transpose())));
  // sigma-sigma
  put(PB::noise, 0, PB::noise, 0, RMatrix::Constant(1, 1, t * ri.squaredNorm()));
  // theta-p
  put(PB::theta, 0, PB::power, 0,
      2.0 * t * rs_wrw.cwiseProduct(wrd.transpose()).real());
  // theta-sigma
  put(PB::theta, 0, PB::noise, 0,
      2.0 * t * (rs * kx.adjoint() * wrd).diagonal().real());
  // p-sigma
  put(PB::power, 0, PB::noise, 0,
      real.take(t * (ri_w.adjoint() * ri_w).diagonal().eval()));

  for (int l = 1; l < l_count; ++l) {
    const CMatrix& ul = u[static_cast<std::size_t>(l)];
    const CMatrix& ri_ul = ri_u[static_cast<std::size_t>(l)];
    const CMatrix wru = ri_w.adjoint() * ul;            // W^H R^-1 P_El A
    const CMatrix rs_wru = rs * wru;                    // Rs W^H R^-1 P_El A
    const CMatrix urd = ul.adjoint() * ri_d;            // A^H P_El R^-1 D
    const CMatrix dru = urd.adjoint();                  // D^H R^-1 P_El A
    const CMatrix urw_rs = wru.adjoint() * rs;          // A^H P_El R^-1 W Rs

    const CMatrix t1 = rs_wru.cwiseProduct(rs_wrd.transpose());
    const CMatrix t2 = g2.cwiseProduct(urd.transpose());
    const CMatrix t3 = dru.cwiseProduct(g2.transpose());
    const CMatrix t4 = drw_rs.cwiseProduct(urw_rs.transpose());
    put(PB::theta, 0, PB::nu, l, real.take(t * (t1 + t2 + t3 + t4)));
    put(PB::theta, 0, PB::eta, l, real.take(kJ * t * (t1 - t2 + t3 - t4)));

    const CMatrix p_mix = wru.cwiseProduct(rs_wrw.transpose());
    put(PB::power, 0, PB::nu, l, 2.0 * t * p_mix.real());
    put(PB::power, 0, PB::eta, l, -2.0 * t * p_mix.imag());

    const CVector s_mix = (rs * kx.adjoint() * wru).diagonal();
    put(PB::noise, 0, PB::nu, l, 2.0 * t * s_mix.real().transpose());
    put(PB::noise, 0, PB::eta, l, -2.0 * t * s_mix.imag().transpose());

    for (int k = l; k < l_count; ++k) {
      const CMatrix& uk = u[static_cast<std::size_t>(k)];
      const CMatrix rs_wrk = rs * (ri_w.adjoint() * uk);
      // Row i belongs to subarray l, column j to subarray k.
      const CMatrix x1 = rs_wrk.cwiseProduct(rs_wru.transpose());
      const CMatrix x2 = g2.cwiseProduct((uk.adjoint() * ri_ul).transpose());
      put(PB::nu, l, PB::nu, k, 2.0 * t * (x1 + x2).real());
      put(PB::eta, l, PB::eta, k, -2.0 * t * (x1 - x2).real());
      put(PB::nu, l, PB::eta, k, -2.0 * t * (x1 - x2).imag());
      if (k != l) {
        // nu_k / eta_l: the same products with the roles of l and k swapped.
        const CMatrix y1 = rs_wru.cwiseProduct(rs_wrk.transpose());
        const CMatrix y2 = g2.cwiseProduct((ul.adjoint() * ri_u[static_cast<std::size_t>(k)]).transpose());
        put(PB::nu, k, PB::eta, l, -2.0 * t * (y1 - y2).imag());
      }
    }
  }
  fim.imag_residue = real.residue(fim.matrix);
  if (fim.imag_residue > 1e-10) {
    throw Error(Errc::degenerate, "FIM block has a non-negligible imaginary part");
  }
  return fim;
}

FimMatrix assemble_fim(const SubarrayLayout& layout, const SceneConfig& scene,
                       const CalibrationSet& calib, int snapshots, CalibrationModel model) {
  if (calib.subarrays() != layout.count() || calib.sources() != scene.num_sources()) {
    throw Error(Errc::dimension_mismatch, "calibration does not match layout and scene");
  }
  return assemble_fim(CrlbModel(layout, scene, calib.h(), model), snapshots);
}

CrlbResult crlb_theta(const FimMatrix& fim) {
  const int d = fim.index.sources;
  const int rest = fim.index.size() - d;
  const RMatrix f11 = fim.matrix.topLeftCorner(d, d);
  const RMatrix f12 = fim.matrix.topRightCorner(d, rest);
  const RMatrix f22 = fim.matrix.bottomRightCorner(rest, rest);

  Eigen::SelfAdjointEigenSolver<RMatrix> eig22(f22);
  const RVector& lam = eig22.eigenvalues();
  const double cutoff = 1e-12 * lam.cwiseAbs().maxCoeff();
  RVector inv_lam(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) inv_lam(k) = lam(k) > cutoff ? 1.0 / lam(k) : 0.0;
  const RMatrix f22_pinv =
      eig22.eigenvectors() * inv_lam.asDiagonal() * eig22.eigenvectors().transpose();

  RMatrix schur = f11 - f12 * f22_pinv * f12.transpose();
  schur = 0.5 * (schur + schur.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(schur);
  const RVector& s = eig.eigenvalues();
  if (s.size() == 0 || s(0) <= 0.0 || s(s.size() - 1) / s(0) > 1e12) {
    throw Error(Errc::non_identifiable, "Schur complement of the DOA block is singular");
  }
  CrlbResult res;
  res.theta_bound = eig.eigenvectors() * s.cwiseInverse().asDiagonal() *
                    eig.eigenvectors().transpose();
  for (int i = 0; i < d; ++i) res.per_source_std.push_back(std::sqrt(res.theta_bound(i, i)));
  return res;
}

CrlbResult crlb_fc_up(const SensorSet& full_array, const SceneConfig& scene, int snapshots) {
  const SubarrayLayout single({full_array}, LayoutKind::custom);
  const CMatrix h = CMatrix::Ones(1, static_cast<Eigen::Index>(scene.num_sources()));
  return crlb_theta(assemble_fim(CrlbModel(single, scene, h, CalibrationModel::fixed), snapshots));
}

}  // namespace subdoa
