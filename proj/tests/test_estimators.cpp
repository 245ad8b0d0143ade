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

#include <gtest/gtest.h>

#include <Eigen/QR>

#include "subdoa/coarray.hpp"
#include "subdoa/errors.hpp"
#include "subdoa/estimators.hpp"
#include "subdoa/signal_model.hpp"
#include "test_util.hpp"

namespace subdoa {
namespace {

using test::eval_poly;
using test::exact_data;
using test::scene_of;

CMatrix block_diag_projector(const std::vector<NoiseSubspace>& subspaces) {
  Eigen::Index total = 0;
  for (const auto& ns : subspaces) total += ns.m;
  CMatrix p = CMatrix::Zero(total, total);
  Eigen::Index r = 0;
  for (const auto& ns : subspaces) {
    p.block(r, r, ns.m, ns.m) = ns.projector();
    r += ns.m;
  }
  return p;
}


TEST(CoarraySteering, Examples) {
  EXPECT_LT((coarray_steering(3, 0.0) - CVector::Ones(3)).norm(), 1e-15);
  CVector b(2);
  b << 1, -1;
  EXPECT_LT((coarray_steering(2, 1.0) - b).norm(), 1e-15);
  CVector c(4);
  c << cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1);
  EXPECT_LT((coarray_steering(4, 0.5) - c).norm(), 1e-15);
  EXPECT_THROW(coarray_steering(0, 0.1), Error);
}

TEST(Grid, UniformHalfOpen) {
  const std::vector<double> g = uniform_grid(4001);
  ASSERT_EQ(g.size(), 4001u);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_GT(g.front(), -1.0);
  EXPECT_NEAR(g[1] - g[0], 2.0 / 4001, 1e-15);
}

TEST(GcaMusic, TwoSourcesExactData) {
  const SubarrayLayout layout = build_type2(SensorSet{0, 1, 4, 7, 9}, 2, 3);
  const SceneConfig scene = scene_of({-0.4, 0.2});
  const auto subspaces = test::exact_subspaces(layout, scene);
  const SpectrumResult res = gca_music(subspaces, 4001, 2);
  ASSERT_EQ(res.estimates.size(), 2u);
  for (int k = 0; k < 2; ++k) EXPECT_LE(std::abs(res.estimates[k] - scene.thetas[k]), 2.0 / 4001);
}

TEST(GcaMusic, SingleSourceAtBroadside) {
  const SubarrayLayout layout = build_type2(SensorSet{0, 1, 4, 7, 9}, 2, 3);
  const auto subspaces = test::exact_subspaces(layout, scene_of({0.0}));
  const SpectrumResult res = gca_music(subspaces, 4001, 1);
  EXPECT_LE(std::abs(res.estimates[0]), 1.0 / 4001 + 1e-12);
}

TEST(GcaMusic, SingleSubarrayMatchesDirectCoarrayMusic) {
  const SensorSet s = test::mra7_reference();
  const SceneConfig scene = scene_of({-0.5, 0.1, 0.62}, 0.7);
  std::mt19937_64 rng(8);
  const CMatrix r = exact_subarray_covariance(s, scene) + 0.05 * test::random_hermitian_psd(7, 7, rng);
  const NoiseSubspace ns = coarray_noise_subspace(r, s, 3);
  const SpectrumResult res = gca_music(std::span<const NoiseSubspace>(&ns, 1), 501, 3);
  const CMatrix proj = ns.projector();
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    CVector a(ns.m);
    for (int k = 0; k < ns.m; ++k) a(k) = std::exp(cplx(0, kPi * k * res.grid[i]));
    const double direct = 1.0 / (a.adjoint() * proj * a).value().real();
    EXPECT_NEAR(res.values[i], direct, 1e-9 * direct);
  }
}

TEST(GcaMusic, InsufficientPeaks) {
  // A noise basis spanning only the zero-lag entry gives a flat spectrum.
  NoiseSubspace flat;
  flat.m = 4;
  flat.d = 0;
  flat.basis = CMatrix::Identity(4, 1);
  try {
    gca_music(std::span<const NoiseSubspace>(&flat, 1), 401, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_peaks);
  }
}

TEST(GcaMusic, TwoPointPlateauCountsOnce) {
  // Symmetric spectrum with the null exactly between two grid points.
  const SubarrayLayout layout = build_type2(SensorSet{0, 1, 4, 7, 9}, 2, 3);
  const auto subspaces = test::exact_subspaces(layout, scene_of({0.0}));
  const SpectrumResult res = gca_music(subspaces, 4000, 1);
  EXPECT_LE(std::abs(res.estimates[0]), 2.0 / 4000);
}

TEST(GcaMusic, NullSpectrumAtTrueDirections) {
  const SubarrayLayout layout = test::mra7_layout();
  const auto subspaces = test::exact_subspaces(layout, scene_of(test::kElevenThetas, 0.0));
  for (double th : test::kElevenThetas) {
    EXPECT_LT(gca_denominator(subspaces, th), 1e-12) << th;
  }
}

TEST(GcaMusic, ElevenSourceSceneExactData) {
  const SubarrayLayout layout = test::mra7_layout();
  const auto subspaces = test::exact_subspaces(layout, scene_of(test::kElevenThetas));
  const SpectrumResult res = gca_music(subspaces, 4001, 11);
  ASSERT_EQ(res.estimates.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) {
    EXPECT_LE(std::abs(res.estimates[k] - test::kElevenThetas[k]), 2.0 / 4001);
  }
}

TEST(GlobalProjection, Examples) {
  std::mt19937_64 rng(1);
  auto make = [&](int m, int d) {
    SmoothedCovariance rss;
    rss.m = m;
    rss.matrix = test::random_hermitian_psd(m, m, rng);
    return noise_subspace(rss, d);
  };
  const std::vector<NoiseSubspace> one{make(5, 2)};
  EXPECT_LT((build_global_projection(one) - one[0].projector()).norm(), 1e-15);

  const std::vector<NoiseSubspace> equal{make(5, 2), make(5, 2), make(5, 2)};
  const CMatrix sum = equal[0].projector() + equal[1].projector() + equal[2].projector();
  EXPECT_LT((build_global_projection(equal) - sum).norm(), 1e-13);

  const std::vector<NoiseSubspace> mixed{make(2, 1), make(3, 1)};
  const CMatrix p = build_global_projection(mixed);
  ASSERT_EQ(p.rows(), 3);
  EXPECT_NEAR(std::abs(p(0, 0) - mixed[1].projector()(0, 0)), 0.0, 1e-15);
  EXPECT_LT((p.bottomRightCorner(2, 2) - mixed[1].projector().bottomRightCorner(2, 2) -
             mixed[0].projector())
                .norm(),
            1e-14);
  EXPECT_LT((p - p.adjoint()).norm(), 1e-14);
}

TEST(GlobalProjection, BlockDiagonalProjectorIsIdempotent) {
  const SubarrayLayout layout = test::mra7_layout();
  std::mt19937_64 rng(17);
  SnapshotData data = simulate(layout, [] {
    SceneConfig s = scene_of(test::kElevenThetas);
    s.snapshots = 500;
    s.seed = 3;
    return s;
  }(), default_calibration(layout, test::kElevenThetas));
  const CMatrix p = block_diag_projector(subarray_noise_subspaces(data, layout, 11));
  EXPECT_LT((p * p - p).norm(), 1e-10);
}

TEST(RootMusic, PolynomialMatchesSpectrum) {
  const SubarrayLayout layout = test::mra7_layout();
  SceneConfig scene = scene_of(test::kElevenThetas);
  scene.snapshots = 300;
  scene.seed = 12;
  const SnapshotData data = simulate(layout, scene, default_calibration(layout, scene.thetas));
  const auto subspaces = subarray_noise_subspaces(data, layout, 11);
  const CVector c = projection_polynomial(build_global_projection(subspaces));
  const int m = subspaces[0].m;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double th = u(rng);
    const cplx z = std::polar(1.0, kPi * th);
    // Q(z) = z^{-(M-1)} * sum_k c_k z^k
    const cplx q = eval_poly(c, z) * std::pow(z, -(m - 1));
    const double den = gca_denominator(subspaces, th);
    EXPECT_NEAR(q.real(), den, 1e-10 * std::max(1.0, den));
    EXPECT_NEAR(q.imag(), 0.0, 1e-10 * std::max(1.0, den));
  }
}

TEST(RootMusic, TwoSourcesExactData) {
  const SubarrayLayout layout = build_type2(SensorSet{0, 1, 4, 7, 9}, 2, 3);
  const SceneConfig scene = scene_of({-0.4, 0.2});
  const RootResult res = gca_rmusic(test::exact_subspaces(layout, scene), 2);
  EXPECT_FALSE(res.root_deficient);
  ASSERT_EQ(res.selected.size(), 2u);
  EXPECT_EQ(res.roots_all.size(), 2u * 10 - 2);
  for (int k = 0; k < 2; ++k) {
    const cplx target = std::polar(1.0, kPi * scene.thetas[k]);
    double best = 1e300;
    for (const cplx& z : res.selected) best = std::min(best, std::abs(z - target));
    EXPECT_LT(best, 1e-6);
    EXPECT_LE(std::abs(res.selected[k]), 1.0 + 1e-9);
  }
}

TEST(RootMusic, SingleSourceAtBroadside) {
  const SubarrayLayout layout = build_type2(SensorSet{0, 1, 4, 7, 9}, 1, 3);
  const RootResult res = gca_rmusic(test::exact_subspaces(layout, scene_of({0.0})), 1);
  EXPECT_LT(std::abs(res.selected[0] - cplx(1, 0)), 1e-8);
}

TEST(RootMusic, ConjugateReciprocalPairing) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 4 + static_cast<int>(rng() % 8);
    const CMatrix p = test::random_hermitian_psd(m, m, rng);
    const std::vector<cplx> roots = polynomial_roots(projection_polynomial(p));
    ASSERT_EQ(roots.size(), static_cast<std::size_t>(2 * m - 2));
    for (const cplx& z : roots) {
      const cplx partner = 1.0 / std::conj(z);
      double best = 1e300;
      for (const cplx& w : roots) best = std::min(best, std::abs(w - partner));
      EXPECT_LT(best, 1e-6 * std::max(1.0, std::abs(partner)));
    }
  }
}

TEST(RootMusic, ElevenSourceSceneExactData) {
  const SubarrayLayout layout = test::mra7_layout();
  const SceneConfig scene = scene_of(test::kElevenThetas);
  const RootResult res = gca_rmusic(test::exact_subspaces(layout, scene), 11);
  EXPECT_FALSE(res.root_deficient);
  ASSERT_EQ(res.estimates.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) {
    const cplx target = std::polar(1.0, kPi * scene.thetas[k]);
    double best = 1e300;
    for (const cplx& z : res.selected) best = std::min(best, std::abs(z - target));
    EXPECT_LT(best, 1e-6) << scene.thetas[k];
  }
}

TEST(RootMusic, InvariantUnderUnitaryRebasing) {
  const SubarrayLayout layout = test::mra7_layout();
  SceneConfig scene = scene_of(test::kElevenThetas);
  scene.snapshots = 400;
  scene.seed = 77;
  const SnapshotData data = simulate(layout, scene, default_calibration(layout, scene.thetas));
  std::vector<NoiseSubspace> subspaces = subarray_noise_subspaces(data, layout, 11);
  const RootResult base = gca_rmusic(subspaces, 11);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (NoiseSubspace& ns : subspaces) {
    const auto k = ns.basis.cols();
    CMatrix z(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) z(i, j) = cplx(g(rng), g(rng));
    }
    const CMatrix q = Eigen::HouseholderQR<CMatrix>(z).householderQ();
    ns.basis = ns.basis * q;
  }
  const RootResult moved = gca_rmusic(subspaces, 11);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_NEAR(moved.estimates[k], base.estimates[k], 1e-9);
}

TEST(RootMusic, DoubleRootPairsCountOnce) {
  // Exact data puts every source on a double root of the unit circle; each
  // must be reported once even when rounding splits the pair along the circle.
  for (int d = 2; d <= 11; ++d) {
    std::vector<double> th;
    for (int k = 0; k < d; ++k) th.push_back(-0.8 + 1.6 * k / (d - 1));
    const RootResult res = gca_rmusic(test::exact_subspaces(test::mra7_layout(), scene_of(th)), d);
    ASSERT_EQ(res.estimates.size(), static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) EXPECT_NEAR(res.estimates[k], th[k], 1e-6) << "D=" << d;
  }
}

TEST(SsMusic, MatchesGcaMusicForSingleSubarray) {
  const SensorSet s = test::mra7_reference();
  const SubarrayLayout layout({s}, LayoutKind::type1);
  SceneConfig scene = scene_of({-0.3, 0.25, 0.5});
  scene.snapshots = 200;
  scene.seed = 2;
  const SnapshotData data = simulate(layout, scene, default_calibration(layout, scene.thetas));
  const SpectrumResult ss = ss_music_baseline(data, layout, 1001, 3);
  const auto subspaces = subarray_noise_subspaces(data, layout, 3);
  const SpectrumResult gca = gca_music(subspaces, 1001, 3);
  for (std::size_t i = 0; i < ss.values.size(); ++i) {
    EXPECT_NEAR(ss.values[i], gca.values[i], 1e-12 * std::max(1.0, gca.values[i]));
  }
  EXPECT_EQ(ss.estimates, gca.estimates);
}

TEST(SsMusic, ElevenSourceSceneExactData) {
  const SubarrayLayout layout = test::mra7_layout();
  const SpectrumResult res =
      ss_music_baseline(exact_data(layout, scene_of(test::kElevenThetas)), layout, 4001, 11);
  for (std::size_t k = 0; k < 11; ++k) {
    EXPECT_LE(std::abs(res.estimates[k] - test::kElevenThetas[k]), 2.0 / 4001);
  }
}

TEST(SsMusic, TooManySources) {
  const SubarrayLayout layout = build_type2(SensorSet{0, 1}, 2, 1);
  std::vector<double> th{-0.6, -0.3, 0.0, 0.3, 0.6};
  const SnapshotData data = exact_data(layout, scene_of(th));
  try {
    ss_music_baseline(data, layout, 401, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_peaks);
  }
}

TEST(Pipeline, ExactDataThroughSnapshots) {
  const SubarrayLayout layout = test::mra7_layout();
  const SceneConfig scene = scene_of(test::kElevenThetas);
  const SnapshotData data = exact_data(layout, scene);
  const auto subspaces = subarray_noise_subspaces(data, layout, 11);
  const SpectrumResult music = gca_music(subspaces, 4001, 11);
  const RootResult root = gca_rmusic(subspaces, 11);
  for (std::size_t k = 0; k < 11; ++k) {
    EXPECT_LE(std::abs(music.estimates[k] - test::kElevenThetas[k]), 2.0 / 4001);
    EXPECT_NEAR(root.estimates[k], test::kElevenThetas[k], 1e-6);
  }
}

}  // namespace
}  // namespace subdoa
