// Copyright 2026 The iolkin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Small helpers shared by the unit tests.

#pragma once

#include <doctest.h>

#include <sstream>
#include <string>

#include "iolkin/error.hpp"
#include "iolkin/ingest.hpp"
#include "iolkin/random.hpp"

namespace iolkin::testing {

/// Runs `fn` and returns the ErrorCode it threw, or nullopt.
template <typename F>
std::optional<ErrorCode> thrown_code(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

#define CHECK_ERROR(expr, ecode) \
  CHECK(::iolkin::testing::thrown_code([&] { (void)(expr); }) == std::optional<::iolkin::ErrorCode>(ecode))

inline Bitmap random_bitmap(Rng& rng, int w, int h, double density) {
  Bitmap b(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) b.set(x, y, rng.bernoulli(density));
  return b;
}

inline std::istringstream stream(const std::string& text) { return std::istringstream(text); }

}  // namespace iolkin::testing
