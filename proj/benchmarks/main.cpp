#include <benchmark/benchmark.h>

// Linked against the plain library: the distro benchmark_main archive carries
// LTO bytecode tied to a specific compiler build.
BENCHMARK_MAIN();
