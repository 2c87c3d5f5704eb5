// Copyright 2026 The lrnkit Authors.
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

namespace lrn {

/// Number of workers used by parallel_for. Defaults to the hardware
/// concurrency; the LRNKIT_THREADS environment variable overrides it.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across the worker pool and waits for all of
/// them. Each index runs exactly once; callers that reduce results must do so
/// in index order afterwards to stay deterministic. Exceptions thrown by a
/// body are rethrown on the calling thread (the first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lrn
