#pragma once

namespace dctmap {

/// Caps the worker threads used by dense linear algebra. n <= 0 restores the default
/// (available parallelism). Without OpenMP support everything runs on one thread.
void set_thread_count(int n);
int thread_count();

}  // namespace dctmap
