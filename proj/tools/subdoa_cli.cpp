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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "subdoa/crlb.hpp"
#include "subdoa/errors.hpp"
#include "subdoa/geometry.hpp"
#include "subdoa/harness.hpp"
#include "subdoa/signal_model.hpp"

namespace {

using namespace subdoa;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;

  // geometry subcommand
  std::string builtin = "mra";
  int n = 7;
  int n1 = 4;
  int n2 = 3;
  std::vector<int> positions;
  std::optional<int> l;
  std::optional<int> mu;
};

bool is_config_error(Errc c) {
  switch (c) {
    case Errc::config_parse:
    case Errc::io:
    case Errc::invalid_argument:
    case Errc::unsupported_size:
    case Errc::size_mismatch:
    case Errc::length_mismatch:
    case Errc::unsupported_layout:
    case Errc::degenerate_geometry:
      return true;
    default:
      return false;
  }
}

ExperimentConfig load(const Options& opt) {
  ExperimentConfig c = opt.config.empty() ? parse_config("{}") : load_config(opt.config);
  if (opt.seed) c.base_seed = *opt.seed;
  if (opt.trials) c.trials = *opt.trials;
  if (opt.workers) c.workers = *opt.workers;
  if (!opt.out.empty()) c.output = opt.out;
  c.validate();
  return c;
}

// Writes to --out when given, otherwise to stdout.
template <typename F>
void emit(const std::string& path, F&& body) {
  if (path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  body(out);
}

std::string join(const std::vector<int>& v) {
  return fmt::format("{}", fmt::join(v, " "));
}

void print_profile(std::ostream& os, const std::string& name, const SensorSet& s) {
  const CoarrayProfile p = difference_coarray(s);
  const int m = p.max_contiguous_lag();
  os << fmt::format("{:<10} {}\n", name + ":", join(s.positions()));
  os << fmt::format("  {:<10} {}\n", "sensors", s.size());
  os << fmt::format("  {:<10} {}\n", "aperture", s.aperture());
  os << fmt::format("  {:<10} {}\n", "dof", p.dof);
  os << fmt::format("  {:<10} {}\n", "udof", p.udof);
  os << fmt::format("  {:<10} {}\n", "hole-free", p.hole_free() ? "yes" : "no");
  os << fmt::format("  {:<10} {}\n", "D", join(p.diff_set));
  os << fmt::format("  {:<10} [{}, {}]\n", "U", -m, m);
  os << fmt::format("  {:>6} {:>6}\n", "lag", "w");
  for (const auto& [lag, w] : p.weight) {
    if (lag >= 0) os << fmt::format("  {:>6} {:>6}\n", lag, w);
  }
}

int cmd_geometry(const Options& opt) {
  GeometrySpec spec;
  spec.builtin = opt.positions.empty() ? opt.builtin : "explicit";
  spec.n = opt.n;
  spec.n1 = opt.n1;
  spec.n2 = opt.n2;
  spec.positions = opt.positions;
  const SensorSet array = spec.resolve();

  std::vector<std::pair<std::string, SensorSet>> arrays{{"array", array}};
  std::optional<DofBound> bound;
  int sdof = 0;
  if (opt.l || opt.mu) {
    const int l = opt.l.value_or(2);
    const int mu = opt.mu.value_or(1);
    const SensorSet ref = array.canonical();
    const SubarrayLayout layout = build_type2(ref, l, mu);
    sdof = difference_coarray(ref).udof;
    bound = type2_dof_bound(sdof, l, mu, ref.aperture());
    arrays.emplace_back("type2", layout.full_array());
  }

  std::ostringstream text;
  for (const auto& [name, s] : arrays) print_profile(text, name, s);
  if (bound) {
    text << fmt::format("dof bound: {} ({}, sdof {})\n", bound->bound,
                        to_string(bound->regime), sdof);
  }
  std::cout << text.str();

  if (!opt.out.empty()) {
    emit(opt.out, [&](std::ostream& os) {
      os << "array,lag,weight\n";
      for (const auto& [name, s] : arrays) {
        for (const auto& [lag, w] : difference_coarray(s).weight) {
          os << name << ',' << lag << ',' << w << '\n';
        }
      }
    });
  }
  return 0;
}

SceneConfig first_scene(const ExperimentConfig& c, std::uint64_t seed) {
  SceneConfig scene = scene_at(c, c.values.front(), seed);
  scene.validate();
  return scene;
}

int cmd_simulate(const Options& opt) {
  const ExperimentConfig c = load(opt);
  const SubarrayLayout layout = build_layout(c);
  const SceneConfig scene = first_scene(c, c.base_seed);
  const SnapshotData data = simulate(layout, scene, default_calibration(layout, scene.thetas));
  emit(opt.out, [&](std::ostream& os) {
    os << "subarray,sensor,snapshot,re,im\n";
    for (std::size_t l = 0; l < data.blocks.size(); ++l) {
      const CMatrix& x = data.blocks[l];
      for (Eigen::Index t = 0; t < x.cols(); ++t) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          os << l << ',' << r << ',' << t << ',' << format_double(x(r, t).real()) << ','
             << format_double(x(r, t).imag()) << '\n';
        }
      }
    }
  });
  return 0;
}

int cmd_estimate(const Options& opt) {
  const ExperimentConfig c = load(opt);
  const SubarrayLayout layout = build_layout(c);
  const SceneConfig scene = first_scene(c, c.base_seed);
  const SnapshotData data = simulate(layout, scene, default_calibration(layout, scene.thetas));
  const int d = static_cast<int>(scene.thetas.size());
  std::vector<double> truth = scene.thetas;
  std::sort(truth.begin(), truth.end());
  bool any_failed = false;
  emit(opt.out, [&](std::ostream& os) {
    os << "estimator,source_index,estimate,truth\n";
    for (Estimator e : c.estimators) {
      const EstimateOutcome o = run_estimator(e, data, layout, d, c.grid_size);
      if (!o.ok) {
        any_failed = true;
        std::cerr << to_string(e) << ": failed (" << o.failure << ")\n";
        continue;
      }
      for (std::size_t k = 0; k < o.estimates.size(); ++k) {
        os << to_string(e) << ',' << k << ',' << format_double(o.estimates[k]) << ','
           << format_double(truth[k]) << '\n';
      }
    }
  });
  return any_failed ? kExitNumerical : 0;
}

int cmd_crlb(const Options& opt) {
  ExperimentConfig c = load(opt);
  if (c.axis != SweepAxis::snr) c.values = {c.snr_db};
  const SubarrayLayout layout = build_layout(c);
  emit(opt.out, [&](std::ostream& os) {
    os << "snr_db,source_index,crlb_value,bound_name\n";
    for (double snr : c.values) {
      SceneConfig scene = scene_at(c, snr, 0);
      scene.validate();
      const CalibrationSet calib = default_calibration(layout, scene.thetas);
      const CrlbResult pc = crlb_theta(assemble_fim(layout, scene, calib, scene.snapshots));
      const CrlbResult fc = crlb_fc_up(layout.full_array(), scene, scene.snapshots);
      for (const auto& [res, name] : {std::pair{&pc, "pc-up-prop"}, std::pair{&fc, "fc-up"}}) {
        for (Eigen::Index k = 0; k < res->theta_bound.rows(); ++k) {
          os << format_double(snr) << ',' << k << ','
             << format_double(res->theta_bound(k, k)) << ',' << name << '\n';
        }
      }
    }
  });
  return 0;
}

int cmd_sweep(const Options& opt) {
  const ExperimentConfig c = load(opt);
  const std::vector<RmseRecord> records = run_experiment(c);
  if (c.output.empty()) write_csv(std::cout, records, c.include_crlb);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction finding with partially-calibrated sparse subarrays"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON experiment configuration");
    sub->add_option("--out", opt.out, "output CSV path (stdout when omitted)");
    sub->add_option("--seed", opt.seed, "base seed override");
    sub->add_option("--trials", opt.trials, "trial count override");
    sub->add_option("--workers", opt.workers, "worker thread override");
  };

  CLI::App* geometry = app.add_subcommand("geometry", "print coarray statistics");
  geometry->add_option("--builtin", opt.builtin, "mra, naq2 or snaq2-7")
      ->check(CLI::IsMember({"mra", "naq2", "snaq2-7"}));
  geometry->add_option("--n", opt.n, "sensor count for mra");
  geometry->add_option("--n1", opt.n1, "naq2 first parameter");
  geometry->add_option("--n2", opt.n2, "naq2 second parameter");
  geometry->add_option("--positions", opt.positions, "explicit sensor positions")->delimiter(',');
  geometry->add_option("--l", opt.l, "type-II subarray count");
  geometry->add_option("--mu", opt.mu, "type-II spacing");
  geometry->add_option("--out", opt.out, "weight function CSV");

  CLI::App* sim = app.add_subcommand("simulate", "write one snapshot realization");
  CLI::App* est = app.add_subcommand("estimate", "run the estimators on one realization");
  CLI::App* crlb = app.add_subcommand("crlb", "evaluate the bounds over the SNR values");
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep");
  for (CLI::App* sub : {sim, est, crlb, sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*geometry) return cmd_geometry(opt);
    if (*sim) return cmd_simulate(opt);
    if (*est) return cmd_estimate(opt);
    if (*crlb) return cmd_crlb(opt);
    return cmd_sweep(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
