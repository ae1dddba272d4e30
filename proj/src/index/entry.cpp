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
#include "pam/index/entry.hpp"

#include <cstring>

namespace pam
{
void
EncodeEntry(const Entry &e, std::span<std::byte, kEntryBytes> out) noexcept
{
  std::memcpy(out.data(), &e.key, sizeof(Key));
  std::memcpy(out.data() + sizeof(Key), &e.rid, sizeof(Rid));
}

Entry
DecodeEntry(std::span<const std::byte, kEntryBytes> in) noexcept
{
  Entry e{};
  std::memcpy(&e.key, in.data(), sizeof(Key));
  std::memcpy(&e.rid, in.data() + sizeof(Key), sizeof(Rid));
  return e;
}

}  // namespace pam
