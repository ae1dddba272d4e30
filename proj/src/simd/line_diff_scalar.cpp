/*
 * Copyright 2026 The pam-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <bit>
#include <cstring>

#include "pam/simd/line_diff.hpp"

namespace pam::simd
{
LineDiff
DiffLineScalar(const std::byte *old_line, const std::byte *new_line) noexcept
{
  LineDiff diff{};
  for (std::size_t w = 0; w < kWordsPerLine; ++w) {
    std::uint64_t a{};
    std::uint64_t b{};
    std::memcpy(&a, old_line + w * kWordBytes, kWordBytes);
    std::memcpy(&b, new_line + w * kWordBytes, kWordBytes);
    const auto x = a ^ b;
    diff.modified_words += x != 0 ? 1U : 0U;
    diff.modified_bits += static_cast<std::uint32_t>(std::popcount(x));
  }
  return diff;
}

}  // namespace pam::simd
