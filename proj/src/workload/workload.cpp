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
#include "pam/workload/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pam
{
PatternKind
ParsePattern(std::string_view name)
{
  if (name == "random") return PatternKind::kRandom;
  if (name == "sequential") return PatternKind::kSequential;
  if (name == "new_keys" || name == "newkeys") return PatternKind::kNewKeys;
  throw std::invalid_argument("unknown pattern: " + std::string{name});
}

std::string_view
PatternName(PatternKind kind)
{
  switch (kind) {
    case PatternKind::kRandom:
      return "random";
    case PatternKind::kSequential:
      return "sequential";
    case PatternKind::kNewKeys:
      return "new_keys";
  }
  return "?";
}

std::uint64_t
PatternSpec::Rows() const noexcept
{
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(domain) * selectivity));
}

void
PatternSpec::Validate() const
{
  if (domain == 0) throw std::invalid_argument("empty key domain");
  if (!(selectivity > 0.0 && selectivity <= 1.0)) throw std::invalid_argument("selectivity must be in (0, 1]");
  if (Rows() == 0) throw std::invalid_argument("selectivity selects less than one row");
}

QueryGenerator::QueryGenerator(PatternSpec spec) : spec_{spec}, rows_{0}, rng_{spec.seed}
{
  spec_.Validate();
  rows_ = spec_.Rows();
  seq_step_ = 0;
  if (spec_.kind == PatternKind::kNewKeys) {
    cells_.resize(MinQueriesToCover());
    std::iota(cells_.begin(), cells_.end(), std::uint64_t{0});
  }
}

std::uint64_t
QueryGenerator::MinQueriesToCover() const noexcept
{
  return (spec_.domain + rows_) / (rows_ + 1);
}

KeyRange
QueryGenerator::Window(std::uint64_t start) const noexcept
{
  const std::uint64_t last = spec_.domain - 1;
  return KeyRange{std::min(start, last), std::min(start + rows_, last)};
}

std::optional<KeyRange>
QueryGenerator::Next()
{
  switch (spec_.kind) {
    case PatternKind::kRandom: {
      std::uniform_int_distribution<std::int64_t> dist(-static_cast<std::int64_t>(rows_),
                                                       static_cast<std::int64_t>(spec_.domain) - 1);
      const std::int64_t min = dist(rng_);
      if (min < 0) {
        const auto hi = static_cast<std::uint64_t>(min + static_cast<std::int64_t>(rows_));
        return KeyRange{0, std::min(hi, spec_.domain - 1)};
      }
      return Window(static_cast<std::uint64_t>(min));
    }
    case PatternKind::kSequential: {
      const std::uint64_t shift = std::max<std::uint64_t>(1, rows_ / 2);
      std::uint64_t start = 0;
      if (seq_step_ == 0) {
        std::uniform_int_distribution<std::uint64_t> dist(0, spec_.domain / 10000);
        seq_offset_ = dist(rng_);
      } else {
        start = seq_offset_ + seq_step_ * shift;
      }
      ++seq_step_;
      if (start + rows_ >= spec_.domain - 1) seq_step_ = 0;  // last window of the round
      return Window(start);
    }
    case PatternKind::kNewKeys: {
      if (cells_.empty()) return std::nullopt;
      std::uniform_int_distribution<std::size_t> dist(0, cells_.size() - 1);
      const std::size_t i = dist(rng_);
      const std::uint64_t cell = cells_[i];
      cells_[i] = cells_.back();
      cells_.pop_back();
      return Window(cell * (rows_ + 1));
    }
  }
  return std::nullopt;
}

WorkloadSpec
WorkloadSpec::Scaled(std::uint64_t scale) const
{
  if (scale == 0) throw std::invalid_argument("scale must be positive");
  auto div = [scale](std::uint64_t n) { return n == 0 ? 0 : std::max<std::uint64_t>(1, n / scale); };
  WorkloadSpec s = *this;
  s.inserts = div(inserts);
  s.deletes = div(deletes);
  s.searches = div(searches);
  return s;
}

WorkloadSpec
LookupWorkload(std::string_view name)
{
  if (name == "A") return WorkloadSpec{"A", 100, 5, 5, 10, true};
  if (name == "B") return WorkloadSpec{"B", 5, 100000, 100000, 5, true};
  if (name == "C") return WorkloadSpec{"C", 10, 100000000, 100000, 20, true};
  if (name == "D") return WorkloadSpec{"D", 10, 10000000, 10000, 10, true};
  if (name == "write_intensive" || name == "write") return WorkloadSpec{"write_intensive", 10, 40000, 40000, 20000, false};
  if (name == "read_intensive" || name == "read") return WorkloadSpec{"read_intensive", 10, 10000, 10000, 80000, false};
  if (name == "balanced") return WorkloadSpec{"balanced", 10, 25000, 25000, 50000, false};
  throw std::invalid_argument("unknown workload: " + std::string{name});
}

std::vector<std::string>
WorkloadNames()
{
  return {"A", "B", "C", "D", "write_intensive", "read_intensive", "balanced"};
}

namespace
{
PatternSpec
RangePattern(const WorkloadSpec &spec, std::uint64_t domain, std::uint64_t seed)
{
  PatternSpec p{};
  p.kind = PatternKind::kRandom;
  p.selectivity = spec.selectivity;
  p.domain = std::max<std::uint64_t>(domain, 1);
  p.seed = seed ^ 0x9e3779b97f4a7c15ULL;
  if (p.Rows() == 0) p.selectivity = 1.0 / static_cast<double>(p.domain);
  return p;
}

}  // namespace

TraceGenerator::TraceGenerator(WorkloadSpec spec, std::uint64_t domain, std::uint64_t seed)
    : spec_{std::move(spec)}, domain_{domain}, rng_{seed}, ranges_{RangePattern(spec_, domain, seed)}, next_key_{domain}
{
  live_.resize(domain_);
  std::iota(live_.begin(), live_.end(), Key{0});
}

std::uint64_t
TraceGenerator::TotalOps() const noexcept
{
  return spec_.batches * (spec_.inserts + spec_.deletes + spec_.searches);
}

std::optional<Op>
TraceGenerator::Next()
{
  const std::array<std::int64_t, 3> weights{static_cast<std::int64_t>(spec_.inserts),
                                            static_cast<std::int64_t>(spec_.deletes),
                                            static_cast<std::int64_t>(spec_.searches)};
  const std::int64_t total = weights[0] + weights[1] + weights[2];
  if (total == 0) return std::nullopt;

  while (batch_ < spec_.batches) {
    if (emitted_in_batch_ == static_cast<std::uint64_t>(total)) {
      ++batch_;
      emitted_in_batch_ = 0;
      current_ = {};
      continue;
    }
    std::size_t pick = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      current_[i] += weights[i];
      if (current_[i] > current_[pick]) pick = i;
    }
    current_[pick] -= total;
    ++emitted_in_batch_;

    Op op{};
    if (pick == 0) {
      op.type = OpType::kInsert;
      op.key = next_key_++;
      op.rid = op.key;
      live_.push_back(op.key);
      return op;
    }
    if (pick == 1) {
      if (live_.empty()) continue;
      std::uniform_int_distribution<std::size_t> dist(0, live_.size() - 1);
      const std::size_t i = dist(rng_);
      op.type = OpType::kDelete;
      op.key = live_[i];
      live_[i] = live_.back();
      live_.pop_back();
      return op;
    }
    if (spec_.range_searches) {
      const auto r = ranges_.Next();
      op.type = OpType::kRangeQuery;
      op.key = r->lo;
      op.hi = r->hi;
      return op;
    }
    if (live_.empty()) continue;
    std::uniform_int_distribution<std::size_t> dist(0, live_.size() - 1);
    op.type = OpType::kPointQuery;
    op.key = live_[dist(rng_)];
    return op;
  }
  return std::nullopt;
}

std::vector<Op>
MakeWorkload(const WorkloadSpec &spec, std::uint64_t domain, std::uint64_t seed)
{
  TraceGenerator gen{spec, domain, seed};
  std::vector<Op> ops;
  ops.reserve(gen.TotalOps());
  while (auto op = gen.Next()) ops.push_back(*op);
  return ops;
}

std::string
FormatOp(const Op &op)
{
  switch (op.type) {
    case OpType::kInsert:
      return "INS " + std::to_string(op.key) + ' ' + std::to_string(op.rid);
    case OpType::kDelete:
      return "DEL " + std::to_string(op.key);
    case OpType::kRangeQuery:
      return "RQ " + std::to_string(op.key) + ' ' + std::to_string(op.hi);
    case OpType::kPointQuery:
      return "PQ " + std::to_string(op.key);
  }
  return {};
}

namespace
{
std::vector<std::uint64_t>
ParseNumbers(std::string_view rest, std::string_view line)
{
  std::vector<std::uint64_t> out;
  std::size_t i = 0;
  while (i < rest.size()) {
    if (rest[i] == ' ' || rest[i] == '\t') {
      ++i;
      continue;
    }
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(rest.data() + i, rest.data() + rest.size(), v);
    if (ec != std::errc{} || (ptr != rest.data() + rest.size() && *ptr != ' ' && *ptr != '\t'))
      throw std::invalid_argument("malformed trace line: " + std::string{line});
    out.push_back(v);
    i = static_cast<std::size_t>(ptr - rest.data());
  }
  return out;
}

}  // namespace

Op
ParseOp(std::string_view line)
{
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  const auto space = line.find(' ');
  if (space == std::string_view::npos) throw std::invalid_argument("malformed trace line: " + std::string{line});
  const auto tag = line.substr(0, space);
  const auto nums = ParseNumbers(line.substr(space + 1), line);
  Op op{};
  if (tag == "INS" && nums.size() == 2) {
    op.type = OpType::kInsert;
    op.key = nums[0];
    op.rid = nums[1];
  } else if (tag == "DEL" && nums.size() == 1) {
    op.type = OpType::kDelete;
    op.key = nums[0];
  } else if (tag == "RQ" && nums.size() == 2 && nums[0] <= nums[1]) {
    op.type = OpType::kRangeQuery;
    op.key = nums[0];
    op.hi = nums[1];
  } else if (tag == "PQ" && nums.size() == 1) {
    op.type = OpType::kPointQuery;
    op.key = nums[0];
  } else {
    throw std::invalid_argument("malformed trace line: " + std::string{line});
  }
  return op;
}

void
WriteTrace(std::ostream &os, const std::vector<Op> &ops)
{
  for (const auto &op : ops) os << FormatOp(op) << '\n';
}

std::vector<Op>
ReadTrace(std::istream &is)
{
  std::vector<Op> ops;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    ops.push_back(ParseOp(line));
  }
  return ops;
}

std::vector<Entry>
MakeDataset(std::uint64_t n, std::uint64_t seed)
{
  std::vector<Entry> data(n);
  for (std::uint64_t i = 0; i < n; ++i) data[i] = Entry{i, i, false};
  std::mt19937_64 rng{seed};
  std::shuffle(data.begin(), data.end(), rng);
  return data;
}

}  // namespace pam
