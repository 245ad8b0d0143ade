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

#include "subdoa/errors.hpp"

namespace subdoa {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::unsupported_size: return "unsupported-size";
    case Errc::size_mismatch: return "size-mismatch";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::degenerate: return "degenerate";
    case Errc::degenerate_geometry: return "degenerate-geometry";
    case Errc::unsupported_layout: return "unsupported-layout";
    case Errc::too_many_sources: return "too-many-sources";
    case Errc::empty_data: return "empty-data";
    case Errc::insufficient_peaks: return "insufficient-peaks";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::reference_subarray: return "reference-subarray";
    case Errc::singular_covariance: return "singular-covariance";
    case Errc::non_identifiable: return "non-identifiable";
    case Errc::config_parse: return "config-parse";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace subdoa
