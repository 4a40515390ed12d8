#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snaptag {

class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reference accumulation: sum of a[i]*b[i] in index order.
float dot_scalar(std::span<const float> a, std::span<const float> b);

/// Vectorized lanes with a scalar tail; falls back to dot_scalar when no
/// vector extensions are compiled in.
float dot_simd(std::span<const float> a, std::span<const float> b);

/// Name of the active dot_simd code path ("avx2", "sse2", "scalar").
const char* simd_backend();

struct MatrixView {
  const float* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;  // row-major
};

std::vector<float> matvec(MatrixView m, std::span<const float> v, bool use_simd);

struct KernelBenchRow {
  std::size_t n;
  double scalar_ns_per_op;
  double simd_ns_per_op;
  double speedup;
};

/// Timed comparison across sizes; result is reported, never asserted.
std::vector<KernelBenchRow> bench_kernels(const std::vector<std::size_t>& sizes,
                                          int repeats = 50);

std::string format_bench_table(const std::vector<KernelBenchRow>& rows);

}  // namespace snaptag
