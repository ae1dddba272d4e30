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
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace pam::simd
{
/// Bytes per PCM cache line. Every kernel in this header works on whole lines.
inline constexpr std::size_t kLineBytes = 64;
inline constexpr std::size_t kWordBytes = 8;
inline constexpr std::size_t kWordsPerLine = kLineBytes / kWordBytes;

/// Result of comparing an old line image with a new one.
struct LineDiff {
  std::uint32_t modified_words{0};  ///< 8-byte words with at least one flipped bit
  std::uint32_t modified_bits{0};   ///< popcount(old XOR new)

  friend constexpr bool operator==(const LineDiff &, const LineDiff &) = default;
};

enum class Kernel { kScalar, kAvx2 };

using LineDiffFn = LineDiff (*)(const std::byte *old_line, const std::byte *new_line) noexcept;

/*
 * Scalar reference kernel. The SIMD variants must agree with it bit for bit.
 */
LineDiff DiffLineScalar(const std::byte *old_line, const std::byte *new_line) noexcept;

#if defined(PAM_HAVE_AVX2_KERNEL)
LineDiff DiffLineAvx2(const std::byte *old_line, const std::byte *new_line) noexcept;
#endif

/// True when the running CPU can execute the given kernel.
bool KernelSupported(Kernel kernel) noexcept;

/**
 * @brief Kernel picked at first use: AVX2 when the CPU supports it, scalar otherwise.
 *
 * Setting the environment variable PAM_FORCE_SCALAR=1 pins the scalar path.
 */
Kernel ActiveKernel() noexcept;

std::string_view KernelName(Kernel kernel) noexcept;

LineDiffFn KernelFunction(Kernel kernel) noexcept;

/// Diff one line with the active kernel.
LineDiff DiffLine(const std::byte *old_line, const std::byte *new_line) noexcept;

/// Diff two equally sized, line-multiple buffers and sum the per-line results.
LineDiff DiffLines(std::span<const std::byte> old_image,
                   std::span<const std::byte> new_image,
                   Kernel kernel = ActiveKernel()) noexcept;

}  // namespace pam::simd
