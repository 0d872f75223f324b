#include "qofdft/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace qofdft {

void set_num_threads(int n) { omp_set_num_threads(std::max(1, n)); }

int num_threads() { return omp_get_max_threads(); }

double deterministic_sum(std::span<const double> values) {
  return chunked_sum(values.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    return s;
  });
}

std::complex<double> deterministic_dot(
    std::span<const std::complex<double>> a,
    std::span<const std::complex<double>> b) {
  const double re = chunked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return s;
  });
  const double im = chunked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return s;
  });
  return {re, im};
}

double deterministic_norm2(std::span<const std::complex<double>> a) {
  return chunked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(a[i]);
    return s;
  });
}

}  // namespace qofdft
