#include "plemelj/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plemelj::parallel {

namespace {
std::atomic<int> g_thread_limit{0};
}

void set_thread_limit(int n) { g_thread_limit = n < 0 ? 0 : n; }

int thread_limit() { return g_thread_limit; }

int apply_thread_env() {
  const char* env = std::getenv("PLEMELJ_THREADS");
  if (env == nullptr || *env == '\0') return thread_limit();
  try {
    set_thread_limit(std::stoi(env));
  } catch (const std::exception&) {
    set_thread_limit(0);
  }
  return thread_limit();
}

int effective_threads() {
#ifdef _OPENMP
  const int limit = g_thread_limit;
  return limit > 0 ? limit : omp_get_max_threads();
#else
  return 1;
#endif
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace plemelj::parallel
