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
#include <iosfwd>
#include <string>
#include <vector>

namespace pam::bench
{
/// One experiment outcome. sim_time_ns is the authoritative cost; host wall time is context only.
struct ResultRow {
  std::string kind;  // convergence, dynamic or index
  std::string label;
  std::string method;
  std::string index;
  std::string invalidation;
  std::string pattern;
  std::string workload;
  double selectivity{0};
  std::uint64_t scale{0};
  std::uint64_t rows{0};
  std::uint64_t seed{0};
  std::uint64_t sim_time_ns{0};
  double host_wall_ms{0};
  std::uint64_t reads{0};
  std::uint64_t line_flushes{0};
  std::uint64_t bits_modified{0};  // wear-out
  std::uint64_t invalidation_ns{0};
  std::uint64_t queries{0};
  std::uint64_t operations{0};
  bool converged{false};

  bool operator==(const ResultRow &) const = default;
};

std::string CsvHeader();
void WriteCsv(std::ostream &os, const std::vector<ResultRow> &rows);
/// Throws std::invalid_argument on a malformed document.
std::vector<ResultRow> ReadCsv(std::istream &is);

/// Plot-ready long format: `figure,series,x,metric,value`.
struct PlotPoint {
  std::string figure;
  std::string series;
  double x{0};
  std::string metric;
  double value{0};
};

std::vector<PlotPoint> GroupForPlots(const std::vector<ResultRow> &rows);
void WritePlotData(std::ostream &os, const std::vector<ResultRow> &rows);

}  // namespace pam::bench
