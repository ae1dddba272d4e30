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
#include <immintrin.h>

#include "pam/simd/line_diff.hpp"

namespace pam::simd
{
namespace
{
// per-nibble popcount lookup, replicated for both 128-bit lanes
inline __m256i
PopcountBytes(__m256i v)
{
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

}  // namespace

LineDiff
DiffLineAvx2(const std::byte *old_line, const std::byte *new_line) noexcept
{
  const auto *a = reinterpret_cast<const __m256i *>(old_line);
  const auto *b = reinterpret_cast<const __m256i *>(new_line);
  const __m256i x0 = _mm256_xor_si256(_mm256_loadu_si256(a), _mm256_loadu_si256(b));
  const __m256i x1 = _mm256_xor_si256(_mm256_loadu_si256(a + 1), _mm256_loadu_si256(b + 1));

  const __m256i zero = _mm256_setzero_si256();
  const int eq0 = _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_cmpeq_epi64(x0, zero)));
  const int eq1 = _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_cmpeq_epi64(x1, zero)));
  const auto unchanged = static_cast<std::uint32_t>(_mm_popcnt_u32(static_cast<unsigned>(eq0))
                                                    + _mm_popcnt_u32(static_cast<unsigned>(eq1)));

  // byte popcounts summed into four 64-bit lanes by SAD against zero
  const __m256i counts = _mm256_add_epi8(PopcountBytes(x0), PopcountBytes(x1));
  const __m256i sums = _mm256_sad_epu8(counts, zero);
  const __m128i folded =
      _mm_add_epi64(_mm256_castsi256_si128(sums), _mm256_extracti128_si256(sums, 1));
  const auto bits = static_cast<std::uint32_t>(_mm_cvtsi128_si64(folded)
                                               + _mm_extract_epi64(folded, 1));

  return LineDiff{static_cast<std::uint32_t>(kWordsPerLine) - unchanged, bits};
}

}  // namespace pam::simd
