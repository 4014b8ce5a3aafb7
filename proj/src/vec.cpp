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

#include "lir/vec.hpp"

#include <bit>
#include <cmath>
#include <cstddef>

namespace lir {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DanglingParent: return "DanglingParent";
    case ErrorKind::DuplicateParent: return "DuplicateParent";
    case ErrorKind::DuplicateChild: return "DuplicateChild";
    case ErrorKind::EmptyParent: return "EmptyParent";
    case ErrorKind::EmptyQuery: return "EmptyQuery";
    case ErrorKind::NegativeGrade: return "NegativeGrade";
    case ErrorKind::UnknownParent: return "UnknownParent";
    case ErrorKind::BadRecord: return "BadRecord";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::BadArgument: return "BadArgument";
    case ErrorKind::BadIndexFile: return "BadIndexFile";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

float dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dot of length " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  float sum = 0.0f;
  for (size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

double norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) {
    sum += static_cast<double>(x) * static_cast<double>(x);
  }
  return std::sqrt(sum);
}

void l2_normalize_inplace(std::span<float> v) {
  const double n = norm(v);
  if (n == 0.0) {
    throw Error(ErrorKind::ZeroVector, "cannot normalize a zero vector");
  }
  const float inv = static_cast<float>(1.0 / n);
  for (float& x : v) {
    x *= inv;
  }
}

Vector l2_normalize(const Vector& v) {
  Vector out = v;
  l2_normalize_inplace(out);
  return out;
}

uint16_t float_to_half(float f) {
  const uint32_t x = std::bit_cast<uint32_t>(f);
  const uint32_t sign = (x >> 16) & 0x8000u;
  const uint32_t exp = (x >> 23) & 0xffu;
  uint32_t man = x & 0x7fffffu;

  if (exp == 0xffu) {  // inf / nan
    return static_cast<uint16_t>(sign | 0x7c00u | (man ? 0x200u : 0u));
  }
  const int half_exp = static_cast<int>(exp) - 127 + 15;
  if (half_exp >= 0x1f) {  // overflow to inf
    return static_cast<uint16_t>(sign | 0x7c00u);
  }
  if (half_exp <= 0) {  // subnormal half or zero
    if (half_exp < -10) {
      return static_cast<uint16_t>(sign);
    }
    man |= 0x800000u;  // implicit leading bit
    const int shift = 14 - half_exp;
    uint32_t half_man = man >> shift;
    const uint32_t rem = man & ((1u << shift) - 1u);
    const uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half_man & 1u))) {
      ++half_man;  // carry into the exponent field is correct here
    }
    return static_cast<uint16_t>(sign | half_man);
  }
  uint32_t h = sign | (static_cast<uint32_t>(half_exp) << 10) | (man >> 13);
  const uint32_t rem = man & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) {
    ++h;  // rounding carry may bump the exponent, 0x7bff + 1 == inf
  }
  return static_cast<uint16_t>(h);
}

float half_to_float(uint16_t h) {
  const uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
  const uint32_t exp = (h >> 10) & 0x1fu;
  uint32_t man = h & 0x3ffu;

  uint32_t x;
  if (exp == 0) {
    if (man == 0) {
      x = sign;
    } else {  // subnormal: renormalize
      int e = -1;
      do {
        man <<= 1;
        ++e;
      } while (!(man & 0x400u));
      man &= 0x3ffu;
      x = sign | (static_cast<uint32_t>(127 - 15 - e) << 23) | (man << 13);
    }
  } else if (exp == 0x1fu) {
    x = sign | 0x7f800000u | (man << 13);
  } else {
    x = sign | ((exp - 15 + 127) << 23) | (man << 13);
  }
  return std::bit_cast<float>(x);
}

}  // namespace lir
