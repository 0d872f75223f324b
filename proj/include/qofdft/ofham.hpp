#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "qofdft/cell.hpp"
#include "qofdft/hamiltonian.hpp"

namespace qofdft {

/// Electron density sampled on the grid (bohr^-3) with its electron count.
/// Integrals use the quadrature (V_cell / N_g) sum_i.
struct DensityGrid {
  SimulationCell cell;
  std::vector<double> values;
  double electrons = 0.0;

  static DensityGrid uniform(const SimulationCell& cell, double electrons);

  double integral() const;
  /// Throws DomainError on negative or non-finite samples and ParameterError
  /// when the integral deviates from `electrons` by more than `tolerance`
  /// (relative to max(1, electrons)).
  void validate(double tolerance = 1e-10) const;
};

enum class KineticModel {
  kNone,         // T_S = lambda T_vW, so v_r vanishes
  kThomasFermi,  // T_S = T_TF + lambda T_vW, so v_r = v_TF
};

enum class XcModel { kNone, kLdaExchange };

struct FunctionalSet {
  KineticModel kinetic = KineticModel::kThomasFermi;
  XcModel xc = XcModel::kLdaExchange;
  double lambda = 1.0;

  void validate() const;
};

/// Density floor below which the von Weizsaecker potential is regularized.
inline constexpr double kDensityFloor = 1e-12;

struct VwDiagnostics {
  std::size_t floored_points = 0;
};

/// Spectral Laplacian on the periodic grid (real part of the plane-wave
/// result, centered momenta).
std::vector<double> laplacian(const SimulationCell& cell,
                              std::span<const double> f);

/// Periodic Poisson solution, 4 pi rho(G)/|G|^2 with the G = 0 term dropped.
std::vector<double> hartree_potential(const DensityGrid& rho);
double hartree_energy(const DensityGrid& rho);

std::vector<double> lda_exchange_potential(const DensityGrid& rho);
double lda_exchange_energy(const DensityGrid& rho);
std::vector<double> xc_potential(const DensityGrid& rho,
                                 const FunctionalSet& funcs);
double xc_energy(const DensityGrid& rho, const FunctionalSet& funcs);

std::vector<double> thomas_fermi_potential(const DensityGrid& rho);
double thomas_fermi_energy(const DensityGrid& rho);

/// -(nabla^2 sqrt(rho)) / (2 sqrt(rho)).
std::vector<double> vw_potential(const DensityGrid& rho,
                                 VwDiagnostics* diagnostics = nullptr);
/// int |nabla sqrt(rho)|^2 / 2, evaluated as int sqrt(rho) (-nabla^2/2) sqrt(rho).
double vw_energy(const DensityGrid& rho);

/// dT_S / d rho for the chosen kinetic model.
std::vector<double> ts_potential(const DensityGrid& rho,
                                 const FunctionalSet& funcs);
double ts_energy(const DensityGrid& rho, const FunctionalSet& funcs);

/// v_r = dT_S/d rho - lambda dT_vW/d rho.
std::vector<double> residual_potential(const DensityGrid& rho,
                                       const FunctionalSet& funcs);

/// v_loc = (v_ext + v_H + v_xc + v_r) / lambda.
OrbitalFreeHamiltonian assemble_hamiltonian(const DensityGrid& rho_in,
                                            const FunctionalSet& funcs,
                                            std::span<const double> v_ext);

struct EnergyBreakdown {
  double kinetic = 0.0;  // T_S
  double external = 0.0;
  double hartree = 0.0;
  double xc = 0.0;
  double total = 0.0;
};

EnergyBreakdown total_energy(const DensityGrid& rho, const FunctionalSet& funcs,
                             std::span<const double> v_ext);

/// Gaussian well -depth * exp(-|r - center|^2 / (2 width^2)), periodically
/// repeated.
struct GaussianWell {
  Vec3 center{0, 0, 0};
  double depth = 0.0;
  double width = 1.0;
};

/// Gaussian-smeared ion, v(G) = -4 pi Z exp(-|G|^2 a^2 / 4) / (V |G|^2).
struct SoftCoulomb {
  Vec3 center{0, 0, 0};
  double charge = 1.0;
  double softening = 0.5;
};

struct ExternalPotentialSpec {
  std::vector<GaussianWell> wells;
  std::vector<SoftCoulomb> ions;
  std::optional<std::filesystem::path> table;

  bool empty() const { return wells.empty() && ions.empty() && !table; }
};

/// Sum of all components with the G = 0 (mean) part removed.
std::vector<double> external_potential(const ExternalPotentialSpec& spec,
                                       const SimulationCell& cell);

/// Text grid file: "qofdft-grid 1", "dims N1 N2 N3", "cell <fingerprint>",
/// then N_g values in linear-index order, 17 significant digits.
void write_grid_file(const std::filesystem::path& path,
                     const SimulationCell& cell, std::span<const double> values);
std::vector<double> read_grid_file(const std::filesystem::path& path,
                                   const SimulationCell& cell);

}  // namespace qofdft
