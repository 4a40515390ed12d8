#include "snaptag/numkernel.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#if defined(__AVX2__) || defined(__SSE2__) || defined(__x86_64__)
#include <immintrin.h>
#define SNAPTAG_X86 1
#endif

namespace snaptag {

namespace {
void require_same_length(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw KernelError("dot: length mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
}
}  // namespace

float dot_scalar(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  float acc = 0.f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

#if defined(__AVX2__)

const char* simd_backend() { return "avx2"; }

float dot_simd(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m256 acc = _mm256_setzero_ps();
  for (; i + 8 <= n; i += 8) {
    __m256 va = _mm256_loadu_ps(a.data() + i);
    __m256 vb = _mm256_loadu_ps(b.data() + i);
    acc = _mm256_add_ps(acc, _mm256_mul_ps(va, vb));
  }
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, acc);
  float sum = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
              ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

#elif defined(__SSE2__) || defined(__x86_64__)

const char* simd_backend() { return "sse2"; }

float dot_simd(std::span<const float> a, std::span<const float> b) {
  require_same_length(a, b);
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m128 acc = _mm_setzero_ps();
  for (; i + 4 <= n; i += 4) {
    __m128 va = _mm_loadu_ps(a.data() + i);
    __m128 vb = _mm_loadu_ps(b.data() + i);
    acc = _mm_add_ps(acc, _mm_mul_ps(va, vb));
  }
  alignas(16) float lanes[4];
  _mm_store_ps(lanes, acc);
  float sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

#else

const char* simd_backend() { return "scalar"; }

float dot_simd(std::span<const float> a, std::span<const float> b) {
  return dot_scalar(a, b);
}

#endif

std::vector<float> matvec(MatrixView m, std::span<const float> v, bool use_simd) {
  if (m.cols != v.size())
    throw KernelError("matvec: shape mismatch");
  std::vector<float> out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::span<const float> row(m.data + r * m.cols, m.cols);
    out[r] = use_simd ? dot_simd(row, v) : dot_scalar(row, v);
  }
  return out;
}

std::vector<KernelBenchRow> bench_kernels(const std::vector<std::size_t>& sizes,
                                          int repeats) {
  std::vector<KernelBenchRow> rows;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<float> dist(-1.f, 1.f);
  for (std::size_t n : sizes) {
    std::vector<float> a(n), b(n);
    for (auto& x : a) x = dist(rng);
    for (auto& x : b) x = dist(rng);
    volatile float sink = 0.f;
    auto time_ns = [&](auto&& fn) {
      // warmup
      sink = sink + fn(a, b);
      auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < repeats; ++r) sink = sink + fn(a, b);
      auto t1 = std::chrono::steady_clock::now();
      return std::chrono::duration<double, std::nano>(t1 - t0).count() / repeats;
    };
    KernelBenchRow row;
    row.n = n;
    row.scalar_ns_per_op = time_ns([](auto& x, auto& y) { return dot_scalar(x, y); });
    row.simd_ns_per_op = time_ns([](auto& x, auto& y) { return dot_simd(x, y); });
    row.speedup = row.simd_ns_per_op > 0
                      ? row.scalar_ns_per_op / row.simd_ns_per_op
                      : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string format_bench_table(const std::vector<KernelBenchRow>& rows) {
  std::ostringstream os;
  os << "backend: " << simd_backend() << "\n";
  os << "       n   scalar ns/op     simd ns/op  speedup\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%8zu %14.1f %14.1f %8.2fx\n", r.n,
                  r.scalar_ns_per_op, r.simd_ns_per_op, r.speedup);
    os << buf;
  }
  return os.str();
}

}  // namespace snaptag
