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

#include <stdexcept>
#include <string>

namespace subdoa {

enum class Errc {
  invalid_argument,
  unsupported_size,
  size_mismatch,
  dimension_mismatch,
  length_mismatch,
  degenerate,
  degenerate_geometry,
  unsupported_layout,
  too_many_sources,
  empty_data,
  insufficient_peaks,
  index_out_of_range,
  reference_subarray,
  singular_covariance,
  non_identifiable,
  config_parse,
  io,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the harness in particular) can tell numerical failures from
/// configuration mistakes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace subdoa
