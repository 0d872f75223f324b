#include <gtest/gtest.h>

#include <functional>
#include <numeric>

#include "oracles.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/ofham.hpp"

using namespace qofdft;

namespace {

using EnergyFn = std::function<double(const DensityGrid&)>;
using PotentialFn = std::function<std::vector<double>(const DensityGrid&)>;

/// Norm-preserving perturbation: zero integral, smooth, bounded by 1.
std::vector<double> perturbation(const SimulationCell& cell) {
  std::vector<double> d(cell.num_points());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto g = cell.grid_index(i).k;
    const double x = double(g[0]) / cell.points(0);
    const double y = double(g[1]) / cell.points(1);
    const double z = double(g[2]) / cell.points(2);
    d[i] = std::cos(2 * oracle::kPi * x) + 0.5 * std::sin(2 * oracle::kPi * (y + z)) +
           0.2 * std::cos(4 * oracle::kPi * z);
  }
  return d;
}

/// Relative mismatch between int v delta and the central difference of E.
double derivative_mismatch(const DensityGrid& rho, const EnergyFn& energy,
                           const PotentialFn& potential) {
  const std::vector<double> d = perturbation(rho.cell);
  const double eps = 1e-4 * (rho.electrons / rho.cell.volume());
  DensityGrid plus = rho, minus = rho;
  for (std::size_t i = 0; i < d.size(); ++i) {
    plus.values[i] += eps * d[i];
    minus.values[i] -= eps * d[i];
  }
  const double fd = (energy(plus) - energy(minus)) / (2 * eps);
  const std::vector<double> v = potential(rho);
  double analytic = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) analytic += v[i] * d[i];
  analytic *= rho.cell.weight();
  return std::abs(fd - analytic) / std::abs(analytic);
}

}  // namespace

TEST(Density, UniformAndValidation) {
  const SimulationCell cell = SimulationCell::cubic(2.0, 2);
  const DensityGrid rho = DensityGrid::uniform(cell, 4.0);
  EXPECT_NEAR(rho.integral(), 4.0, 1e-14);
  EXPECT_NEAR(rho.values[0], 0.5, 1e-15);
  EXPECT_NO_THROW(rho.validate());
  DensityGrid bad = rho;
  bad.values[3] = -1e-3;
  EXPECT_THROW(bad.validate(), DomainError);
  DensityGrid off = rho;
  off.values[0] += 0.1;
  EXPECT_THROW(off.validate(), ParameterError);
}

TEST(Functionals, UniformDensityClosedForms) {
  const SimulationCell cell = SimulationCell::cubic(1.5, 2);
  const DensityGrid rho = DensityGrid::uniform(cell, 3.0);
  const double n = 3.0 / cell.volume();
  const double cf = 0.3 * std::pow(3 * oracle::kPi * oracle::kPi, 2.0 / 3.0);
  const double cx = 0.75 * std::cbrt(3.0 / oracle::kPi);
  EXPECT_NEAR(thomas_fermi_energy(rho), cf * std::pow(n, 5.0 / 3.0) * cell.volume(), 1e-12);
  EXPECT_NEAR(lda_exchange_energy(rho), -cx * std::pow(n, 4.0 / 3.0) * cell.volume(), 1e-12);
  EXPECT_NEAR(thomas_fermi_potential(rho)[5], 5.0 / 3.0 * cf * std::pow(n, 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(lda_exchange_potential(rho)[5], -4.0 / 3.0 * cx * std::cbrt(n), 1e-12);
  EXPECT_NEAR(vw_energy(rho), 0.0, 1e-13);
  EXPECT_NEAR(vw_potential(rho)[0], 0.0, 1e-12);
  EXPECT_NEAR(hartree_energy(rho), 0.0, 1e-13);
}

TEST(Functionals, LaplacianOfPlaneWave) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 3);
  std::vector<double> f(cell.num_points());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(2 * oracle::kPi * cell.grid_point(i)[1]);
  const std::vector<double> lf = laplacian(cell, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(lf[i], -4 * oracle::kPi * oracle::kPi * f[i], 1e-10);
  }
}

TEST(Functionals, HartreeOfSingleCosine) {
  const SimulationCell cell = oracle::fcc_cell(3.0, 3);
  const double amp = 0.05;
  const double base = 1.0 / cell.volume();
  std::vector<double> v(cell.num_points());
  const Vec3& g = cell.reciprocal(0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = base + amp * std::cos(dot(g, cell.grid_point(i)));
  const DensityGrid rho{cell, v, 1.0};
  const std::vector<double> vh = hartree_potential(rho);
  const double scale = 4 * oracle::kPi * amp / dot(g, g);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(vh[i], scale * std::cos(dot(g, cell.grid_point(i))), 1e-10);
  }
}

TEST(Functionals, PotentialsAreEnergyDerivatives) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 3);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  EXPECT_LT(derivative_mismatch(rho, thomas_fermi_energy, thomas_fermi_potential), 1e-6);
  EXPECT_LT(derivative_mismatch(rho, lda_exchange_energy, lda_exchange_potential), 1e-6);
  EXPECT_LT(derivative_mismatch(rho, hartree_energy, hartree_potential), 1e-6);
  EXPECT_LT(derivative_mismatch(
                rho, [](const DensityGrid& r) { return vw_energy(r); },
                [](const DensityGrid& r) { return vw_potential(r); }),
            1e-6);
}

TEST(Functionals, ResidualPotentialDropsTheLaplacianShare) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  const FunctionalSet tf{KineticModel::kThomasFermi, XcModel::kLdaExchange, 0.5};
  const std::vector<double> vr = residual_potential(rho, tf);
  const std::vector<double> vtf = thomas_fermi_potential(rho);
  for (std::size_t i = 0; i < vr.size(); ++i) EXPECT_NEAR(vr[i], vtf[i], 1e-12);

  const FunctionalSet vw_only{KineticModel::kNone, XcModel::kNone, 1.0};
  for (double x : residual_potential(rho, vw_only)) EXPECT_NEAR(x, 0.0, 1e-14);
  EXPECT_THROW((FunctionalSet{KineticModel::kNone, XcModel::kNone, 0.0}.validate()),
               ParameterError);
}

TEST(Hamiltonian, AssemblyDividesByLambda) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  std::vector<double> vext(cell.num_points(), 0.0);
  vext[7] = -1.0;
  const FunctionalSet f1{KineticModel::kThomasFermi, XcModel::kLdaExchange, 1.0};
  const FunctionalSet f2{KineticModel::kThomasFermi, XcModel::kLdaExchange, 2.0};
  const OrbitalFreeHamiltonian h1 = assemble_hamiltonian(rho, f1, vext);
  const OrbitalFreeHamiltonian h2 = assemble_hamiltonian(rho, f2, vext);
  const std::vector<double> vh = hartree_potential(rho);
  const std::vector<double> vx = lda_exchange_potential(rho);
  const std::vector<double> vtf = thomas_fermi_potential(rho);
  for (std::size_t i = 0; i < vext.size(); ++i) {
    const double vks = vext[i] + vh[i] + vx[i];
    EXPECT_NEAR(h1.v_loc[i], vks + vtf[i], 1e-12);
    EXPECT_NEAR(h2.v_loc[i], (vks + vtf[i]) / 2.0, 1e-12);
  }
  EXPECT_EQ(h2.lambda, 2.0);
}

TEST(Energy, BreakdownSumsComponents) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  std::vector<double> vext(cell.num_points());
  for (std::size_t i = 0; i < vext.size(); ++i) vext[i] = std::sin(double(i));
  const FunctionalSet f{};
  const EnergyBreakdown e = total_energy(rho, f, vext);
  double ext = 0.0;
  for (std::size_t i = 0; i < vext.size(); ++i) ext += vext[i] * rho.values[i];
  EXPECT_NEAR(e.external, ext * cell.weight(), 1e-12);
  EXPECT_NEAR(e.kinetic, thomas_fermi_energy(rho) + vw_energy(rho), 1e-12);
  EXPECT_NEAR(e.total, e.kinetic + e.external + e.hartree + e.xc, 1e-12);
}

TEST(External, GaussianWellIsCenteredAndMeanFree) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 3);
  ExternalPotentialSpec spec;
  spec.wells.push_back({{0.5, 0.5, 0.5}, 5.0, 0.15});
  const std::vector<double> v = external_potential(spec, cell);
  double mean = 0.0;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    mean += v[i];
    if (v[i] < v[argmin]) argmin = i;
  }
  EXPECT_NEAR(mean / double(v.size()), 0.0, 1e-12);
  EXPECT_EQ(cell.grid_index(argmin), (GridIndex{{4, 4, 4}}));

  ExternalPotentialSpec ion;
  ion.ions.push_back({{0.0, 0.0, 0.0}, 1.0, 0.3});
  const std::vector<double> vi = external_potential(ion, cell);
  EXPECT_LT(vi[0], vi[cell.linear_index({{4, 4, 4}})]);
}

TEST(GridFile, RoundTripAndCellCheck) {
  const SimulationCell cell = oracle::fcc_cell(2.0, 2);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  const auto dir = oracle::scratch_dir("gridfile");
  write_grid_file(dir / "rho.grid", cell, rho.values);
  const std::vector<double> back = read_grid_file(dir / "rho.grid", cell);
  ASSERT_EQ(back.size(), rho.values.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], rho.values[i]);
  EXPECT_THROW(read_grid_file(dir / "rho.grid", SimulationCell::cubic(2.0, 2)), Error);
  EXPECT_THROW(read_grid_file(dir / "missing.grid", cell), IoError);

  ExternalPotentialSpec table;
  table.table = dir / "rho.grid";
  const std::vector<double> vt = external_potential(table, cell);
  const double mean = std::accumulate(rho.values.begin(), rho.values.end(), 0.0) /
                      double(rho.values.size());
  for (std::size_t i = 0; i < vt.size(); ++i) EXPECT_NEAR(vt[i], rho.values[i] - mean, 1e-12);
}
