#pragma once

#include <functional>

namespace ssm {

/// Process-wide worker bound used by parallel_for when callers do not pass one.
void set_worker_count(int workers);
int worker_count();

/// Runs fn(0..n-1) on up to `workers` threads. Each index must write only to
/// its own output slot; results are then independent of the worker count.
void parallel_for(int n, const std::function<void(int)>& fn, int workers = 0);

}  // namespace ssm
