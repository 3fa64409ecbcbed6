#include "dctmap/threads.hpp"

#include <Eigen/Core>
#include <thread>

#ifdef DCTMAP_HAVE_OPENMP
#include <omp.h>
#endif

namespace dctmap {

void set_thread_count(int n) {
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
#ifdef DCTMAP_HAVE_OPENMP
  omp_set_num_threads(n);
#endif
  Eigen::setNbThreads(n);
}

int thread_count() { return Eigen::nbThreads(); }

}  // namespace dctmap
