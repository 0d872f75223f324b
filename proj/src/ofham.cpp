#include "qofdft/ofham.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qofdft/errors.hpp"
#include "qofdft/fft.hpp"
#include "qofdft/parallel.hpp"

namespace qofdft {

namespace {

constexpr double kPi = std::numbers::pi;

/// (3/10)(3 pi^2)^{2/3}.
const double kThomasFermiCoefficient = 0.3 * std::pow(3.0 * kPi * kPi, 2.0 / 3.0);
/// (3/pi)^{1/3}.
const double kExchangeCoefficient = std::cbrt(3.0 / kPi);

void check_non_negative(const DensityGrid& rho) {
  for (double x : rho.values) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw DomainError("density must be finite and non-negative");
    }
  }
}

void check_same_grid(const DensityGrid& rho, std::size_t n, const char* what) {
  if (n != rho.cell.num_points()) {
    throw LayoutError(std::string(what) + " has " + std::to_string(n) +
                      " entries, density grid has " +
                      std::to_string(rho.cell.num_points()));
  }
}

double integrate(const SimulationCell& cell, std::span<const double> f) {
  return cell.weight() * deterministic_sum(f);
}

double integrate_product(const SimulationCell& cell, std::span<const double> a,
                         std::span<const double> b) {
  return cell.weight() *
         chunked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
           double s = 0.0;
           for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
           return s;
         });
}

/// Applies multiplier(|G|^2) to the plane-wave components of f.
template <class Multiplier>
std::vector<double> reciprocal_filter(const SimulationCell& cell,
                                      std::span<const double> f,
                                      Multiplier multiplier) {
  const std::size_t n = cell.num_points();
  const std::array<int, 3> dims{cell.points(0), cell.points(1), cell.points(2)};
  std::vector<cplx> work(f.begin(), f.end());
  fft::transform_3d(work, dims, fft::Direction::kForward);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 g = cell.momentum_value(cell.fft_momentum(i));
    work[i] *= multiplier(dot(g, g)) * inv_n;
  }
  fft::transform_3d(work, dims, fft::Direction::kBackward);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = work[i].real();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityGrid, FunctionalSet

DensityGrid DensityGrid::uniform(const SimulationCell& cell, double electrons) {
  return {cell, std::vector<double>(cell.num_points(), electrons / cell.volume()),
          electrons};
}

double DensityGrid::integral() const { return integrate(cell, values); }

void DensityGrid::validate(double tolerance) const {
  check_same_grid(*this, values.size(), "density");
  check_non_negative(*this);
  if (!(electrons > 0.0)) {
    throw ParameterError("electron count must be positive");
  }
  const double n = integral();
  if (std::abs(n - electrons) > tolerance * std::max(1.0, electrons)) {
    throw ParameterError("density integrates to " + std::to_string(n) +
                         " electrons, expected " + std::to_string(electrons));
  }
}

void FunctionalSet::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be a positive finite constant");
  }
}

// ---------------------------------------------------------------------------
// Reciprocal-space operators

std::vector<double> laplacian(const SimulationCell& cell,
                              std::span<const double> f) {
  if (f.size() != cell.num_points()) {
    throw LayoutError("laplacian input does not match the grid");
  }
  return reciprocal_filter(cell, f, [](double g2) { return -g2; });
}

std::vector<double> hartree_potential(const DensityGrid& rho) {
  check_same_grid(rho, rho.values.size(), "density");
  return reciprocal_filter(rho.cell, rho.values, [](double g2) {
    return g2 > 0.0 ? 4.0 * kPi / g2 : 0.0;
  });
}

double hartree_energy(const DensityGrid& rho) {
  const std::vector<double> v = hartree_potential(rho);
  return 0.5 * integrate_product(rho.cell, rho.values, v);
}

// ---------------------------------------------------------------------------
// Local functionals

std::vector<double> lda_exchange_potential(const DensityGrid& rho) {
  check_non_negative(rho);
  std::vector<double> v(rho.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = -kExchangeCoefficient * std::cbrt(rho.values[i]);
  }
  return v;
}

double lda_exchange_energy(const DensityGrid& rho) {
  check_non_negative(rho);
  std::vector<double> e(rho.values.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = rho.values[i] * std::cbrt(rho.values[i]);
  }
  return -0.75 * kExchangeCoefficient * integrate(rho.cell, e);
}

std::vector<double> xc_potential(const DensityGrid& rho,
                                 const FunctionalSet& funcs) {
  switch (funcs.xc) {
    case XcModel::kLdaExchange:
      return lda_exchange_potential(rho);
    case XcModel::kNone:
      check_non_negative(rho);
      return std::vector<double>(rho.values.size(), 0.0);
  }
  return {};
}

double xc_energy(const DensityGrid& rho, const FunctionalSet& funcs) {
  if (funcs.xc == XcModel::kLdaExchange) return lda_exchange_energy(rho);
  check_non_negative(rho);
  return 0.0;
}

std::vector<double> thomas_fermi_potential(const DensityGrid& rho) {
  check_non_negative(rho);
  std::vector<double> v(rho.values.size());
  const double c = 5.0 / 3.0 * kThomasFermiCoefficient;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r13 = std::cbrt(rho.values[i]);
    v[i] = c * r13 * r13;
  }
  return v;
}

double thomas_fermi_energy(const DensityGrid& rho) {
  check_non_negative(rho);
  std::vector<double> e(rho.values.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r13 = std::cbrt(rho.values[i]);
    e[i] = rho.values[i] * r13 * r13;
  }
  return kThomasFermiCoefficient * integrate(rho.cell, e);
}

std::vector<double> vw_potential(const DensityGrid& rho,
                                 VwDiagnostics* diagnostics) {
  check_non_negative(rho);
  const std::size_t n = rho.values.size();
  std::vector<double> phi(n);
  std::size_t floored = 0;
  for (std::size_t i = 0; i < n; ++i) phi[i] = std::sqrt(rho.values[i]);
  const std::vector<double> lap = laplacian(rho.cell, phi);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = phi[i];
    if (rho.values[i] < kDensityFloor) {
      denom = std::sqrt(kDensityFloor);
      ++floored;
    }
    v[i] = -lap[i] / (2.0 * denom);
  }
  if (diagnostics) diagnostics->floored_points = floored;
  return v;
}

double vw_energy(const DensityGrid& rho) {
  check_non_negative(rho);
  std::vector<double> phi(rho.values.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::sqrt(rho.values[i]);
  const std::vector<double> lap = laplacian(rho.cell, phi);
  return -0.5 * integrate_product(rho.cell, phi, lap);
}

std::vector<double> ts_potential(const DensityGrid& rho,
                                 const FunctionalSet& funcs) {
  funcs.validate();
  std::vector<double> v = vw_potential(rho);
  for (double& x : v) x *= funcs.lambda;
  if (funcs.kinetic == KineticModel::kThomasFermi) {
    const std::vector<double> tf = thomas_fermi_potential(rho);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += tf[i];
  }
  return v;
}

double ts_energy(const DensityGrid& rho, const FunctionalSet& funcs) {
  funcs.validate();
  double t = funcs.lambda * vw_energy(rho);
  if (funcs.kinetic == KineticModel::kThomasFermi) t += thomas_fermi_energy(rho);
  return t;
}

std::vector<double> residual_potential(const DensityGrid& rho,
                                       const FunctionalSet& funcs) {
  std::vector<double> v = ts_potential(rho, funcs);
  const std::vector<double> vw = vw_potential(rho);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= funcs.lambda * vw[i];
  return v;
}

OrbitalFreeHamiltonian assemble_hamiltonian(const DensityGrid& rho_in,
                                            const FunctionalSet& funcs,
                                            std::span<const double> v_ext) {
  funcs.validate();
  check_same_grid(rho_in, rho_in.values.size(), "density");
  check_same_grid(rho_in, v_ext.size(), "external potential");
  const std::vector<double> vh = hartree_potential(rho_in);
  const std::vector<double> vxc = xc_potential(rho_in, funcs);
  // With T_S = T_TF + lambda T_vW the residual is v_TF exactly; evaluating
  // it directly avoids subtracting two regularized vW terms.
  std::vector<double> vr(rho_in.values.size(), 0.0);
  if (funcs.kinetic == KineticModel::kThomasFermi) {
    vr = thomas_fermi_potential(rho_in);
  }
  OrbitalFreeHamiltonian h{rho_in.cell, std::vector<double>(v_ext.size()),
                           funcs.lambda};
  for (std::size_t i = 0; i < v_ext.size(); ++i) {
    h.v_loc[i] = (v_ext[i] + vh[i] + vxc[i] + vr[i]) / funcs.lambda;
    if (!std::isfinite(h.v_loc[i])) {
      throw NumericalError("non-finite local potential at grid point " +
                           std::to_string(i));
    }
  }
  return h;
}

EnergyBreakdown total_energy(const DensityGrid& rho, const FunctionalSet& funcs,
                             std::span<const double> v_ext) {
  check_same_grid(rho, v_ext.size(), "external potential");
  EnergyBreakdown e;
  e.kinetic = ts_energy(rho, funcs);
  e.external = integrate_product(rho.cell, v_ext, rho.values);
  e.hartree = hartree_energy(rho);
  e.xc = xc_energy(rho, funcs);
  e.total = e.kinetic + e.external + e.hartree + e.xc;
  return e;
}

// ---------------------------------------------------------------------------
// External potential

std::vector<double> external_potential(const ExternalPotentialSpec& spec,
                                       const SimulationCell& cell) {
  const std::size_t n = cell.num_points();
  std::vector<double> v(n, 0.0);

  for (const auto& w : spec.wells) {
    if (!(w.width > 0.0)) throw ParameterError("Gaussian width must be positive");
    // Images whose contribution can exceed 1e-17 * depth.
    const double cutoff = w.width * std::sqrt(2.0 * std::log(1e17));
    std::array<int, 3> reach{};
    for (int l = 0; l < 3; ++l) {
      reach[l] = static_cast<int>(
                     std::ceil(cutoff * norm(cell.reciprocal(l)) / (2.0 * kPi))) +
                 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 r = cell.grid_point(i);
      double s = 0.0;
      for (int m1 = -reach[0]; m1 <= reach[0]; ++m1) {
        for (int m2 = -reach[1]; m2 <= reach[1]; ++m2) {
          for (int m3 = -reach[2]; m3 <= reach[2]; ++m3) {
            const Vec3 image = w.center + (double(m1) * cell.lattice(0) +
                                          double(m2) * cell.lattice(1) +
                                          double(m3) * cell.lattice(2));
            const Vec3 d = r - image;
            s += std::exp(-dot(d, d) / (2.0 * w.width * w.width));
          }
        }
      }
      v[i] -= w.depth * s;
    }
  }

  if (!spec.ions.empty()) {
    std::vector<cplx> vg(n, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 g = cell.momentum_value(cell.fft_momentum(i));
      const double g2 = dot(g, g);
      if (g2 == 0.0) continue;
      for (const auto& ion : spec.ions) {
        const double a = ion.softening;
        const double amp = -4.0 * kPi * ion.charge * std::exp(-g2 * a * a / 4.0) /
                           (cell.volume() * g2);
        vg[i] += amp * std::polar(1.0, -dot(g, ion.center));
      }
    }
    fft::transform_3d(vg, {cell.points(0), cell.points(1), cell.points(2)},
                      fft::Direction::kBackward);
    for (std::size_t i = 0; i < n; ++i) v[i] += vg[i].real();
  }

  if (spec.table) {
    const std::vector<double> t = read_grid_file(*spec.table, cell);
    for (std::size_t i = 0; i < n; ++i) v[i] += t[i];
  }

  if (!spec.empty()) {
    const double mean = deterministic_sum(v) / static_cast<double>(n);
    for (double& x : v) x -= mean;
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("non-finite external potential");
  }
  return v;
}

}  // namespace qofdft
