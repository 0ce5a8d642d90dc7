// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mssde {

/// Worker count from an explicit request, else MSSDE_THREADS, else 1.
std::size_t resolve_threads(std::size_t requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must
/// write only to slots owned by their index, so results do not depend on
/// scheduling. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace mssde
