// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace chaining {

// Number of worker threads used by parallel maps. Taken from the
// CHAINING_THREADS environment variable unless overridden; defaults to the
// hardware concurrency.
std::size_t worker_count();

// 0 restores the environment/hardware default.
void set_worker_count(std::size_t workers);

// Calls body(i) for every i in [0, n). Work items are claimed dynamically, so
// body must write its result to a slot indexed by i; any reduction has to be
// done afterwards in index order. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chaining
