#include "spatecon/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

namespace {
std::atomic<int> g_default_threads{0};
}

void set_default_threads(int n)
{
    g_default_threads.store(n < 0 ? 0 : n);
}

int default_threads()
{
    return g_default_threads.load();
}

int ExecSpec::resolved_threads() const
{
    if (mode == Exec::Serial)
        return 1;
    int n = threads > 0 ? threads : default_threads();
    if (n <= 0) {
#ifdef _OPENMP
        n = omp_get_max_threads();
#else
        n = static_cast<int>(std::thread::hardware_concurrency());
#endif
    }
    return std::max(1, n);
}

} // namespace spatecon
