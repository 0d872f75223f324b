#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

namespace qofdft::fft {

enum class Direction {
  kForward,   // sum_k x_k exp(-2 pi i j k / N)
  kBackward,  // sum_k x_k exp(+2 pi i j k / N)
};

/// Unnormalized in-place 1D transform of length `length` along a strided axis
/// of a flat array. Elements of one transform are `stride` apart; every other
/// index combination of `data` is transformed independently.
void transform_axis(std::span<std::complex<double>> data, std::size_t length,
                    std::size_t stride, Direction dir);

/// Unnormalized in-place 3D transform of a row-major n0 x n1 x n2 array.
void transform_3d(std::span<std::complex<double>> data,
                  const std::array<int, 3>& dims, Direction dir);

}  // namespace qofdft::fft
