#include "qofdft/oracle.hpp"

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"

namespace qofdft {

namespace {

DensityGrid density_from_vector(const Eigen::VectorXcd& phi, const DensityGrid& like) {
  DensityGrid rho{like.cell, std::vector<double>(like.values.size()), like.electrons};
  const double n2 = phi.squaredNorm();
  if (!(n2 > 0.0)) throw NumericalError("eigensolver returned a zero vector");
  const double scale = like.electrons / (like.cell.weight() * n2);
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    rho.values[i] = std::norm(phi[static_cast<Eigen::Index>(i)]) * scale;
  }
  return rho;
}

}  // namespace

GroundStateStage eigensolver_stage(const OracleOptions& options) {
  return [options](const OrbitalFreeHamiltonian& h, const DensityGrid& rho_in) {
    Eigen::VectorXcd phi;
    if (options.solver == OracleSolver::kDense) {
      phi = dense_ground_state(dense::hamiltonian_matrix(h)).vector;
    } else {
      const SparseOfOperator op(h);
      // Start from sqrt(rho_in) and precondition with the plane-wave
      // diagonal shifted below its minimum, which keeps M positive definite.
      Eigen::MatrixXcd x0(op.dimension(), 1);
      for (Eigen::Index i = 0; i < x0.rows(); ++i) {
        x0(i, 0) = std::sqrt(rho_in.values[static_cast<std::size_t>(i)]);
      }
      const double floor_shift = op.natural_diagonal().values.minCoeff() - 1.0;
      const Preconditioner m =
          build_preconditioner(op, floor_shift, PreconditionerKind::kJacobi, 0.0);
      const LobpcgResult r = lobpcg(op, m, x0, options.lobpcg);
      if (!r.converged) {
        throw NumericalError("LOBPCG ground state did not converge in " +
                             std::to_string(r.iterations) + " iterations");
      }
      phi = r.vectors.col(0);
    }
    return StageResult{density_from_vector(phi, rho_in), 1.0, std::nullopt};
  };
}

ScfTrace classical_scf_oracle(const DensityGrid& rho0, const FunctionalSet& funcs,
                              std::span<const double> v_ext,
                              const ScfConfig& config, const OracleOptions& options,
                              const IterationObserver& observer) {
  return run_scf(rho0, funcs, v_ext, config, eigensolver_stage(options), observer);
}

}  // namespace qofdft
