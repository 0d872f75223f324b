#include "qofdft/fft.hpp"

#include <fftw3.h>

#include <string>

#include "qofdft/errors.hpp"

namespace qofdft::fft {

namespace {

int sign_of(Direction dir) {
  return dir == Direction::kForward ? FFTW_FORWARD : FFTW_BACKWARD;
}

fftw_complex* as_fftw(std::span<std::complex<double>> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() { fftw_destroy_plan(plan_); }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace

void transform_axis(std::span<std::complex<double>> data, std::size_t length,
                    std::size_t stride, Direction dir) {
  if (length == 0 || stride == 0 || data.size() % (length * stride) != 0) {
    throw LayoutError("axis transform of length " + std::to_string(length) +
                      " and stride " + std::to_string(stride) +
                      " does not tile an array of " +
                      std::to_string(data.size()) + " elements");
  }
  if (length == 1) return;
  const std::size_t outer = data.size() / (length * stride);

  fftw_iodim dim{static_cast<int>(length), static_cast<int>(stride),
                 static_cast<int>(stride)};
  fftw_iodim loops[2] = {
      {static_cast<int>(outer), static_cast<int>(length * stride),
       static_cast<int>(length * stride)},
      {static_cast<int>(stride), 1, 1},
  };
  fftw_complex* p = as_fftw(data);
  // FFTW_ESTIMATE leaves the array untouched while planning and picks the
  // same algorithm on every run.
  Plan plan(fftw_plan_guru_dft(1, &dim, 2, loops, p, p, sign_of(dir),
                               FFTW_ESTIMATE));
  plan.execute();
}

void transform_3d(std::span<std::complex<double>> data,
                  const std::array<int, 3>& dims, Direction dir) {
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  if (data.size() != n) {
    throw LayoutError("3D transform expects " + std::to_string(n) +
                      " elements, got " + std::to_string(data.size()));
  }
  fftw_complex* p = as_fftw(data);
  Plan plan(fftw_plan_dft_3d(dims[0], dims[1], dims[2], p, p, sign_of(dir),
                             FFTW_ESTIMATE));
  plan.execute();
}

}  // namespace qofdft::fft
