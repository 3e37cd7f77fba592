#pragma once

namespace plemelj {

/// Execution policy for the data-parallel kernels. `serial` selects the
/// reference implementation; both produce bit-identical results.
enum class Exec { serial, parallel };

namespace parallel {

/// Caps the number of OpenMP threads used by the kernels. 0 = runtime default.
void set_thread_limit(int n);
int thread_limit();

/// Reads PLEMELJ_THREADS (0 = auto) and applies it. Returns the value applied.
int apply_thread_env();

/// Threads a parallel region would actually get.
int effective_threads();

bool openmp_enabled();

}  // namespace parallel
}  // namespace plemelj
