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
#include "pam/bench/config.hpp"

#include <fstream>
#include <istream>
#include <stdexcept>

namespace pam::bench
{
namespace
{
std::string
Trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t
ParseU64(const std::string &key, const std::string &value)
{
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size()) throw std::invalid_argument("invalid value for " + key + ": " + value);
  return v;
}

double
ParseDouble(const std::string &key, const std::string &value)
{
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size()) throw std::invalid_argument("invalid value for " + key + ": " + value);
  return v;
}

}  // namespace

Method
ParseMethod(std::string_view name)
{
  if (name == "am") return Method::kAm;
  if (name == "eam") return Method::kEam;
  if (name == "pam") return Method::kPam;
  throw std::invalid_argument("unknown method: " + std::string{name});
}

std::string_view
MethodName(Method m)
{
  switch (m) {
    case Method::kAm:
      return "am";
    case Method::kEam:
      return "eam";
    case Method::kPam:
      return "pam";
  }
  return "?";
}

RunKind
ExperimentConfig::Kind() const
{
  if (workload.empty() && trace_in.empty()) return RunKind::kConvergence;
  if (!workload.empty()) {
    const auto spec = LookupWorkload(workload);
    if (!spec.range_searches) return RunKind::kIndex;
  }
  return RunKind::kDynamic;
}

Invalidation
ExperimentConfig::EffectiveInvalidation() const
{
  if (invalidation) return *invalidation;
  return method == Method::kEam ? Invalidation::kBitmap : Invalidation::kFlag;
}

std::string
ExperimentConfig::Label() const
{
  if (Kind() == RunKind::kIndex) return std::string{IndexKindName(index)};
  if (method == Method::kPam) return "pam+" + std::string{IndexKindName(index)};
  return std::string{MethodName(method)} + "/" + std::string{InvalidationName(EffectiveInvalidation())};
}

void
ExperimentConfig::Validate() const
{
  device.Validate();
  if (rows == 0) throw std::invalid_argument("rows must be positive");
  if (!(selectivity > 0.0 && selectivity <= 1.0)) throw std::invalid_argument("selectivity must be in (0, 1]");
  if (scale == 0) throw std::invalid_argument("scale must be positive");
  if (partition_capacity == 0 || pool_capacity == 0 || buffer_threshold == 0)
    throw std::invalid_argument("capacities must be positive");
  if (index == IndexKind::kPartitioned) throw std::invalid_argument("index must be one of bb, sb, ub");
  if (invalidation && method == Method::kPam)
    throw std::invalid_argument("invalidation strategies apply to am and eam only");
  if (!workload.empty()) (void)LookupWorkload(workload);
  if (Kind() == RunKind::kConvergence) {
    PatternSpec p{pattern, selectivity, rows, seed};
    p.Validate();
  }
}

void
ExperimentConfig::Set(const std::string &key, const std::string &value)
{
  if (key == "method") {
    method = ParseMethod(value);
  } else if (key == "index") {
    index = ParseIndexKind(value);
  } else if (key == "invalidation") {
    invalidation = ParseInvalidation(value);
  } else if (key == "pattern") {
    pattern = ParsePattern(value);
  } else if (key == "selectivity") {
    selectivity = ParseDouble(key, value);
  } else if (key == "selectivity_pct") {
    selectivity = ParseDouble(key, value) / 100.0;
  } else if (key == "workload") {
    workload = value;
  } else if (key == "scale") {
    scale = ParseU64(key, value);
  } else if (key == "rows" || key == "dataset_size") {
    rows = ParseU64(key, value);
  } else if (key == "seed") {
    seed = ParseU64(key, value);
  } else if (key == "max_queries") {
    max_queries = ParseU64(key, value);
  } else if (key == "partition_capacity") {
    partition_capacity = ParseU64(key, value);
  } else if (key == "pool_capacity") {
    pool_capacity = ParseU64(key, value);
  } else if (key == "buffer_threshold") {
    buffer_threshold = ParseU64(key, value);
  } else if (key == "trace_in") {
    trace_in = value;
  } else if (key == "trace_out") {
    trace_out = value;
  } else if (!device.Set(key, value)) {
    throw std::invalid_argument("unknown setting: " + key);
  }
}

std::vector<ExperimentConfig>
ParseConfig(std::istream &in, const ExperimentConfig &base)
{
  ExperimentConfig defaults = base;
  std::vector<ExperimentConfig> runs;
  bool in_section = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("line " + std::to_string(line_no) + ": bad section header");
      runs.push_back(defaults);
      in_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = Trim(line.substr(0, eq));
    const auto value = Trim(line.substr(eq + 1));
    try {
      (in_section ? runs.back() : defaults).Set(key, value);
    } catch (const std::invalid_argument &e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (runs.empty()) runs.push_back(defaults);
  return runs;
}

std::vector<ExperimentConfig>
LoadConfigFile(const std::filesystem::path &path, const ExperimentConfig &base)
{
  std::ifstream in{path};
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  return ParseConfig(in, base);
}

}  // namespace pam::bench
