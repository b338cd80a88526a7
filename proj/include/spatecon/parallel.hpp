#ifndef SPATECON_PARALLEL_HPP
#define SPATECON_PARALLEL_HPP

namespace spatecon {

/// Execution mode for the data-parallel kernels. Every kernel has a serial
/// reference path and an OpenMP path; both must produce bit-identical
/// results for the same inputs.
enum class Exec {
    Serial,
    OpenMP,
};

struct ExecSpec {
    Exec mode = Exec::OpenMP;
    int threads = 0; // 0 = process default

    int resolved_threads() const;
};

/// Process-wide default thread count (0 = hardware concurrency).
void set_default_threads(int n);
int default_threads();

} // namespace spatecon

#endif
