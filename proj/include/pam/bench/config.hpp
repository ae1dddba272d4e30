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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pam/index/merge_index.hpp"
#include "pam/merging/adaptive_merging.hpp"
#include "pam/pcm/device.hpp"
#include "pam/workload/workload.hpp"

namespace pam::bench
{
enum class Method { kAm, kEam, kPam };

Method ParseMethod(std::string_view name);
std::string_view MethodName(Method m);

/// What a run does, derived from the configuration.
enum class RunKind {
  kConvergence,  // pattern queries until every partition is gone
  kDynamic,      // a modification workload against an adaptive method
  kIndex,        // an index workload against a bulkloaded index, no partitions
};

struct ExperimentConfig {
  Method method{Method::kPam};
  IndexKind index{IndexKind::kBB};
  std::optional<Invalidation> invalidation;  // default depends on the method
  PatternKind pattern{PatternKind::kRandom};
  double selectivity{0.05};
  std::string workload;  // empty: convergence run
  std::uint64_t scale{100};
  std::uint64_t rows{1'000'000};
  std::uint64_t seed{1};
  std::uint64_t max_queries{0};  // 0: 10x the analytic minimum
  std::size_t partition_capacity{65536};
  std::size_t pool_capacity{4096};
  std::size_t buffer_threshold{4096};
  pcm::DeviceConfig device{};
  std::string trace_in;
  std::string trace_out;

  [[nodiscard]] RunKind Kind() const;
  [[nodiscard]] Invalidation EffectiveInvalidation() const;
  /// e.g. `pam+bb`, `am/flag`, `eam/bitmap`.
  [[nodiscard]] std::string Label() const;

  /// Throws std::invalid_argument for inconsistent settings.
  void Validate() const;
  /// Applies one key=value setting; throws std::invalid_argument for unknown keys or bad values.
  void Set(const std::string &key, const std::string &value);
};

/**
 * Reads a run list. Lines are `key = value`; `#` starts a comment. Settings
 * before the first `[section]` are defaults; every section is one run that
 * starts from those defaults. A file without sections is a single run.
 */
std::vector<ExperimentConfig> ParseConfig(std::istream &in, const ExperimentConfig &base = {});
std::vector<ExperimentConfig> LoadConfigFile(const std::filesystem::path &path, const ExperimentConfig &base = {});

}  // namespace pam::bench
