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

#include "qdisc/app/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

namespace qdisc::app {

std::size_t effective_workers(std::size_t requested, std::size_t job_count) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv(kMaxWorkersEnv)) {
    std::size_t limit = 0;
    const char* end = cap + std::strlen(cap);
    const auto res = std::from_chars(cap, end, limit);
    if (res.ec == std::errc() && res.ptr == end && limit > 0) n = std::min(n, limit);
  }
  n = std::min(n, std::max<std::size_t>(job_count, 1));
  return std::max<std::size_t>(n, 1);
}

void run_jobs(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

}  // namespace qdisc::app
