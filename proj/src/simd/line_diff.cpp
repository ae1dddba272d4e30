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
#include <algorithm>
#include <cstdlib>
#include <cstring>

#include "pam/simd/line_diff.hpp"

namespace pam::simd
{
namespace
{
Kernel
SelectKernel() noexcept
{
  if (const char *force = std::getenv("PAM_FORCE_SCALAR"); force != nullptr && std::strcmp(force, "0") != 0) {
    return Kernel::kScalar;
  }
  if (KernelSupported(Kernel::kAvx2)) return Kernel::kAvx2;
  return Kernel::kScalar;
}

}  // namespace

bool
KernelSupported(Kernel kernel) noexcept
{
  switch (kernel) {
    case Kernel::kScalar:
      return true;
    case Kernel::kAvx2:
#if defined(PAM_HAVE_AVX2_KERNEL)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
      return false;
#endif
  }
  return false;
}

Kernel
ActiveKernel() noexcept
{
  static const Kernel kernel = SelectKernel();
  return kernel;
}

std::string_view
KernelName(Kernel kernel) noexcept
{
  return kernel == Kernel::kAvx2 ? "avx2" : "scalar";
}

LineDiffFn
KernelFunction(Kernel kernel) noexcept
{
#if defined(PAM_HAVE_AVX2_KERNEL)
  if (kernel == Kernel::kAvx2 && KernelSupported(Kernel::kAvx2)) return &DiffLineAvx2;
#endif
  (void)kernel;
  return &DiffLineScalar;
}

LineDiff
DiffLine(const std::byte *old_line, const std::byte *new_line) noexcept
{
  static const LineDiffFn fn = KernelFunction(ActiveKernel());
  return fn(old_line, new_line);
}

LineDiff
DiffLines(std::span<const std::byte> old_image,
          std::span<const std::byte> new_image,
          Kernel kernel) noexcept
{
  const auto fn = KernelFunction(kernel);
  LineDiff total{};
  const auto n = std::min(old_image.size(), new_image.size()) / kLineBytes;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = fn(old_image.data() + i * kLineBytes, new_image.data() + i * kLineBytes);
    total.modified_words += d.modified_words;
    total.modified_bits += d.modified_bits;
  }
  return total;
}

}  // namespace pam::simd
