#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qofdft {

inline constexpr std::size_t kReductionChunk = 4096;

/// Evaluates partial(lo, hi) over fixed chunks of [0, n) (in parallel when
/// n spans several chunks) and adds the partial sums in index order, so the
/// result does not depend on the thread count.
template <class Partial>
double chunked_sum(std::size_t n, Partial partial) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> sums(chunks, 0.0);
#pragma omp parallel for schedule(static) if (chunks > 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t hi = lo + kReductionChunk < n ? lo + kReductionChunk : n;
    sums[c] = partial(lo, hi);
  }
  double total = 0.0;
  for (double s : sums) total += s;
  return total;
}

/// Sets the number of worker threads used by elementwise kernels.
void set_num_threads(int n);
int num_threads();

/// Sums in fixed-size chunks whose partial results are combined in index
/// order. The result is bitwise independent of the thread count.
double deterministic_sum(std::span<const double> values);

/// sum_i conj(a_i) b_i with the same fixed reduction order.
std::complex<double> deterministic_dot(std::span<const std::complex<double>> a,
                                       std::span<const std::complex<double>> b);

/// sum_i |a_i|^2.
double deterministic_norm2(std::span<const std::complex<double>> a);

}  // namespace qofdft
