// Copyright 2026 The qdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace qdisc::app {

/// Environment variable holding an upper bound on the worker count.
inline constexpr const char* kMaxWorkersEnv = "QDISC_MAX_WORKERS";

/// The requested count (0 means hardware concurrency), capped by
/// QDISC_MAX_WORKERS when that is set to a positive integer, and by the
/// number of jobs. Always at least 1.
std::size_t effective_workers(std::size_t requested, std::size_t job_count);

/// Runs job(i) for i in [0, count) on `workers` threads. Jobs are claimed in
/// index order; each must write only its own result slot. Exceptions escaping
/// a job terminate the program, so jobs are expected to catch their own.
void run_jobs(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

}  // namespace qdisc::app
