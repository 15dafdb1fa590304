#include <benchmark/benchmark.h>

// The distro's libbenchmark_main.a carries LTO bytecode from another GCC
// release, so the entry point is built here instead.
BENCHMARK_MAIN();
