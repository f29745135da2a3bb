/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROSSRISK_PARALLEL_HPP_
#define CROSSRISK_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace crossrisk {

// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index runs
// exactly once; results must be written to index-owned slots. If any call
// throws, the exception from the lowest failing index is rethrown.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace crossrisk

#endif  // CROSSRISK_PARALLEL_HPP_
