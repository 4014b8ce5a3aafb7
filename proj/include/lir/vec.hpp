// Copyright 2026-present the lir project
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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lir/error.hpp"

namespace lir {

/// One dense embedding. All vectors of a corpus share one dimension and are
/// stored as 32-bit floats; fp16 is a compute mode, never a storage format.
using Vector = std::vector<float>;

/// Inner product. Every similarity computed anywhere in the engine goes
/// through this one kernel, so distinct retrieval routes over the same data
/// produce bit-identical similarities.
float dot(std::span<const float> a, std::span<const float> b);

double norm(std::span<const float> v);

/// Scales v to unit Euclidean norm. Throws ZeroVector when the input has no
/// direction.
Vector l2_normalize(const Vector& v);
void l2_normalize_inplace(std::span<float> v);

// IEEE 754 binary16 conversion (round to nearest even). Used by the reduced
// precision scoring mode.
uint16_t float_to_half(float f);
float half_to_float(uint16_t h);
inline float round_to_half(float f) { return half_to_float(float_to_half(f)); }

}  // namespace lir
