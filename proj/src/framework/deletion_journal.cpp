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
#include "pam/framework/deletion_journal.hpp"

#include <sstream>

namespace pam
{
bool
DeletionJournal::Add(Key key)
{
  if (!keys_.insert(key).second) return false;
  log_.Append(Entry{key, 0, true});
  return true;
}

void
DeletionJournal::Crash() noexcept
{
  keys_.clear();
  log_.Crash();
}

void
DeletionJournal::Recover()
{
  keys_.clear();
  for (const auto &e : log_.Recover()) keys_.insert(e.key);
}

std::string
DeletionJournal::ToCsv() const
{
  std::ostringstream os;
  os << "key\n";
  for (Key k : keys_) os << k << '\n';
  return os.str();
}

}  // namespace pam
