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

#include <memory>
#include <vector>

#include "pam/bench/config.hpp"
#include "pam/bench/results.hpp"
#include "pam/framework/method.hpp"

namespace pam::bench
{
/// Builds the adaptive method a configuration asks for on the given device.
std::unique_ptr<AdaptiveMethod> MakeMethod(const ExperimentConfig &config, pcm::SimDevice &device);

/// Device settings for a run: the configured device, grown to fit the dataset and trace.
pcm::DeviceConfig SizedDevice(const ExperimentConfig &config);

/**
 * Pattern queries against a freshly initialized method until every partition
 * is freed, or until the query cap. Device counters start after initialization.
 */
ResultRow RunConvergence(const ExperimentConfig &config);

/// Replays a workload trace (generated or read from trace_in) against an initialized method.
ResultRow RunDynamic(const ExperimentConfig &config);

/// Bulkloads the dataset into a bare index, then replays an index workload.
ResultRow RunIndexWorkload(const ExperimentConfig &config);

/// Dispatches on config.Kind().
ResultRow RunExperiment(const ExperimentConfig &config);

/// Runs independent configurations on up to `jobs` threads; each run owns its device.
std::vector<ResultRow> RunAll(const std::vector<ExperimentConfig> &configs, unsigned jobs);

}  // namespace pam::bench
