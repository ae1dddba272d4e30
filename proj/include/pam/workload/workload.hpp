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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pam/framework/interval_set.hpp"
#include "pam/index/entry.hpp"

namespace pam
{
enum class PatternKind { kRandom, kSequential, kNewKeys };

PatternKind ParsePattern(std::string_view name);
std::string_view PatternName(PatternKind kind);

/// Query pattern over the dense key domain [0, domain).
struct PatternSpec {
  PatternKind kind{PatternKind::kRandom};
  double selectivity{0.05};
  std::uint64_t domain{0};
  std::uint64_t seed{1};

  /// Width of a query in key units: floor(domain * selectivity).
  [[nodiscard]] std::uint64_t Rows() const noexcept;
  /// Throws std::invalid_argument for an empty domain or a selectivity giving zero rows.
  void Validate() const;
};

/**
 * @brief Deterministic stream of range queries for one pattern.
 *
 * A query spans [start, start + rows] clamped to the domain. Random picks start
 * uniformly in [-rows, domain - 1] so the edges are reachable. Sequential starts
 * every round at [0, rows] and then shifts by rows/2 from a random offset in the
 * first 0.01% of the domain. New-keys hands out the cells of a grid of width
 * rows + 1 in random order and ends once the domain is used up.
 */
class QueryGenerator
{
 public:
  explicit QueryGenerator(PatternSpec spec);

  /// Next range, or nullopt once a new-keys stream is exhausted.
  std::optional<KeyRange> Next();

  /// Fewest queries of this width that can cover the domain.
  [[nodiscard]] std::uint64_t MinQueriesToCover() const noexcept;
  [[nodiscard]] const PatternSpec &Spec() const noexcept { return spec_; }

 private:
  [[nodiscard]] KeyRange Window(std::uint64_t start) const noexcept;

  PatternSpec spec_;
  std::uint64_t rows_;
  std::mt19937_64 rng_;
  // sequential state
  std::uint64_t seq_offset_{0};
  std::uint64_t seq_step_{0};
  // new-keys state
  std::vector<std::uint64_t> cells_;
};

enum class OpType { kInsert, kDelete, kRangeQuery, kPointQuery };

struct Op {
  OpType type{OpType::kPointQuery};
  Key key{0};  // lo for range queries
  Key hi{0};   // range queries only
  Rid rid{0};  // inserts only

  bool operator==(const Op &) const = default;
};

/// Per-batch composition of a modification workload.
struct WorkloadSpec {
  std::string name;
  std::uint64_t batches{0};
  std::uint64_t inserts{0};
  std::uint64_t deletes{0};
  std::uint64_t searches{0};
  bool range_searches{true};  // false: point searches
  double selectivity{0.05};

  /// Divides every count by scale, keeping at least one of anything present.
  [[nodiscard]] WorkloadSpec Scaled(std::uint64_t scale) const;
};

/// Built-in table by name: A, B, C, D, write_intensive (write), read_intensive (read), balanced.
/// Throws std::invalid_argument for other names.
WorkloadSpec LookupWorkload(std::string_view name);
std::vector<std::string> WorkloadNames();

/**
 * @brief Lazily generated operation trace.
 *
 * Inserts use fresh increasing keys above the initial domain (rid = key).
 * Deletes and point searches pick uniformly among the live keys. Range
 * searches follow the random pattern over the initial domain. Inside a batch
 * the operation types interleave by smooth weighted round-robin, ties going to
 * insert, then delete, then search.
 */
class TraceGenerator
{
 public:
  TraceGenerator(WorkloadSpec spec, std::uint64_t domain, std::uint64_t seed);

  std::optional<Op> Next();
  [[nodiscard]] std::uint64_t TotalOps() const noexcept;
  [[nodiscard]] std::uint64_t Batch() const noexcept { return batch_; }

 private:
  WorkloadSpec spec_;
  std::uint64_t domain_;
  std::mt19937_64 rng_;
  QueryGenerator ranges_;
  std::vector<Key> live_;
  Key next_key_;
  std::uint64_t batch_{0};
  std::uint64_t emitted_in_batch_{0};
  std::array<std::int64_t, 3> current_{};
};

std::vector<Op> MakeWorkload(const WorkloadSpec &spec, std::uint64_t domain, std::uint64_t seed);

/// Text form: `INS <key> <rid>`, `DEL <key>`, `RQ <lo> <hi>`, `PQ <key>`.
std::string FormatOp(const Op &op);
/// Throws std::invalid_argument on malformed lines.
Op ParseOp(std::string_view line);
void WriteTrace(std::ostream &os, const std::vector<Op> &ops);
std::vector<Op> ReadTrace(std::istream &is);

/// The dense dataset 0..n-1 in a seeded shuffled order, rid = key.
std::vector<Entry> MakeDataset(std::uint64_t n, std::uint64_t seed);

}  // namespace pam
