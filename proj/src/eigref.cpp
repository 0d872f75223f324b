#include "qofdft/eigref.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/fft.hpp"

namespace qofdft {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

std::vector<double> fft_order_kinetic(const SimulationCell& cell) {
  std::vector<double> t(cell.num_points());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec3 p = cell.momentum_value(cell.fft_momentum(i));
    t[i] = 0.5 * dot(p, p);
  }
  return t;
}

/// Applies diag(factors) in the plane-wave basis of `cell` to every column.
MatrixXcd plane_wave_diagonal(const SimulationCell& cell, const MatrixXcd& x,
                              const std::vector<double>& factors) {
  const auto dims = std::array<int, 3>{cell.points(0), cell.points(1),
                                       cell.points(2)};
  const double inv_n = 1.0 / static_cast<double>(cell.num_points());
  MatrixXcd y(x.rows(), x.cols());
  std::vector<cplx> buf(static_cast<std::size_t>(x.rows()));
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < x.rows(); ++r) buf[r] = x(r, c);
    fft::transform_3d(buf, dims, fft::Direction::kForward);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= factors[i] * inv_n;
    fft::transform_3d(buf, dims, fft::Direction::kBackward);
    for (Index r = 0; r < x.rows(); ++r) y(r, c) = buf[r];
  }
  return y;
}

/// Orthonormalizes the columns of `s` through the eigendecomposition of its
/// scaled Gram matrix, discarding directions whose Gram eigenvalue falls below
/// `drop` times the largest. Two passes restore orthogonality lost to
/// rounding in the first.
MatrixXcd svqb(const MatrixXcd& s, double drop) {
  MatrixXcd q = s;
  for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) {
    VectorXd scale = q.colwise().norm().transpose();
    std::vector<Index> keep;
    for (Index c = 0; c < q.cols(); ++c) {
      if (scale[c] > 0.0) keep.push_back(c);
    }
    MatrixXcd nz(q.rows(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      nz.col(static_cast<Index>(j)) = q.col(keep[j]) / scale[keep[j]];
    }
    if (nz.cols() == 0) return nz;
    MatrixXcd gram = nz.adjoint() * nz;
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
    const VectorXd& w = es.eigenvalues();
    const double wmax = w.maxCoeff();
    std::vector<Index> good;
    for (Index j = 0; j < w.size(); ++j) {
      if (w[j] > drop * wmax) good.push_back(j);
    }
    MatrixXcd basis(nz.rows(), static_cast<Index>(good.size()));
    for (std::size_t j = 0; j < good.size(); ++j) {
      basis.col(static_cast<Index>(j)) =
          nz * es.eigenvectors().col(good[j]) / std::sqrt(w[good[j]]);
    }
    q = std::move(basis);
  }
  return q;
}

/// Removes from `w` its components along the orthonormal columns of `q`.
void project_out(MatrixXcd& w, const MatrixXcd& q) {
  if (q.cols() == 0 || w.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= q * (q.adjoint() * w);
}

MatrixXcd hstack(const std::vector<const MatrixXcd*>& blocks, Index rows) {
  Index cols = 0;
  for (const auto* b : blocks) cols += b->cols();
  MatrixXcd s(rows, cols);
  Index at = 0;
  for (const auto* b : blocks) {
    s.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return s;
}

constexpr double kDropTolerance = 1e-13;

}  // namespace

void fix_phase(Eigen::VectorXcd& v) {
  if (v.size() == 0) return;
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs * (1.0 + 1e-12)) {
      best = i;
      best_abs = a;
    }
  }
  if (best_abs <= 0.0) return;
  v *= std::conj(v[best]) / best_abs;
  v[best] = best_abs;
}

GroundState dense_ground_state(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw LayoutError("ground state needs a square matrix");
  if (static_cast<std::size_t>(h.rows()) > dense::kMaxDenseDimension) {
    throw LayoutError("dense ground state limited to dimension " +
                      std::to_string(dense::kMaxDenseDimension));
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition failed");
  }
  GroundState gs;
  gs.energy = es.eigenvalues()[0];
  gs.vector = es.eigenvectors().col(0);
  fix_phase(gs.vector);
  return gs;
}

GroundState dense_ground_state(const HamiltonianOperator& h) {
  if (h.dimension() > dense::kMaxDenseDimension) {
    throw LayoutError("dense ground state limited to dimension " +
                      std::to_string(dense::kMaxDenseDimension));
  }
  return dense_ground_state(h.dense_matrix());
}

SparseOfOperator::SparseOfOperator(OrbitalFreeHamiltonian h)
    : h_(std::move(h)), kinetic_(fft_order_kinetic(h_.cell)) {
  if (h_.v_loc.size() != h_.cell.num_points()) {
    throw LayoutError("potential size does not match the grid");
  }
}

Index SparseOfOperator::dimension() const {
  return static_cast<Index>(h_.cell.num_points());
}

Eigen::MatrixXcd SparseOfOperator::apply(const Eigen::MatrixXcd& x) const {
  if (x.rows() != dimension()) throw LayoutError("block height does not match operator");
  MatrixXcd y = plane_wave_diagonal(h_.cell, x, kinetic_);
  const Index n = x.rows();
  const Index cols = x.cols();
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < cols; ++c) y(r, c) += h_.v_loc[r] * x(r, c);
  }
  return y;
}

Eigen::MatrixXcd SparseOfOperator::dense() const {
  return dense::hamiltonian_matrix(h_);
}

NaturalDiagonal SparseOfOperator::natural_diagonal() const {
  double mean = 0.0;
  for (double v : h_.v_loc) mean += v;
  mean /= static_cast<double>(h_.v_loc.size());
  NaturalDiagonal d;
  d.values.resize(static_cast<Index>(kinetic_.size()));
  for (std::size_t i = 0; i < kinetic_.size(); ++i) {
    d.values[static_cast<Index>(i)] = kinetic_[i] + mean;
  }
  d.plane_wave_cell = h_.cell;
  return d;
}

Eigen::MatrixXcd Preconditioner::apply(const Eigen::MatrixXcd& block) const {
  switch (kind_) {
    case PreconditionerKind::kIdentity:
      return block;
    case PreconditionerKind::kShiftedInverse:
      return lu_.solve(block);
    case PreconditionerKind::kJacobi: {
      if (diagonal_.plane_wave_cell) {
        std::vector<double> f(inverse_diagonal_.data(),
                              inverse_diagonal_.data() + inverse_diagonal_.size());
        return plane_wave_diagonal(*diagonal_.plane_wave_cell, block, f);
      }
      return inverse_diagonal_.asDiagonal() * block;
    }
  }
  return block;
}

Preconditioner build_preconditioner(const LinearOperator& op, double mu,
                                    PreconditionerKind kind,
                                    std::optional<double> delta, double floor) {
  if (!std::isfinite(mu)) throw ParameterError("preconditioner shift must be finite");
  if (floor <= 0.0) throw ParameterError("preconditioner floor must be positive");
  if (delta && (*delta < 0.0 || !std::isfinite(*delta))) {
    throw ParameterError("shift guard delta must be non-negative");
  }
  Preconditioner m;
  m.kind_ = kind;
  m.shift_ = mu;
  if (kind == PreconditionerKind::kIdentity) return m;

  if (kind == PreconditionerKind::kShiftedInverse) {
    MatrixXcd h = op.dense();
    const SpectralBounds b = gershgorin_bounds(h);
    const double range = std::max(b.width(), 1e-300);
    const double d = delta ? *delta : 1e-6 * range;
    m.shift_ = mu - d;
    for (int attempt = 0; attempt < 2; ++attempt) {
      MatrixXcd shifted = h;
      shifted.diagonal().array() -= m.shift_;
      m.lu_.compute(shifted);
      const VectorXd pivots = m.lu_.matrixLU().diagonal().cwiseAbs();
      if (pivots.minCoeff() >= floor * pivots.maxCoeff()) return m;
      m.shift_ -= d > 0.0 ? d : floor * range;
      m.shift_adjusted_ = true;
    }
    throw NumericalError("shifted matrix remains singular after shift adjustment");
  }

  m.diagonal_ = op.natural_diagonal();
  const VectorXd& dg = m.diagonal_.values;
  const double range = std::max(dg.maxCoeff() - dg.minCoeff(), 1e-300);
  const double d = delta ? *delta : 1e-6 * range;
  m.shift_ = mu - d;
  m.inverse_diagonal_.resize(dg.size());
  for (Index i = 0; i < dg.size(); ++i) {
    double denom = dg[i] - m.shift_;
    if (std::abs(denom) < floor) {
      denom = denom < 0.0 ? -floor : floor;
      m.shift_adjusted_ = true;
    }
    m.inverse_diagonal_[i] = 1.0 / denom;
  }
  return m;
}

LobpcgResult lobpcg(const LinearOperator& op, const Preconditioner& precond,
                    const Eigen::MatrixXcd& initial_block,
                    const LobpcgOptions& options) {
  const Index n = op.dimension();
  const Index b = initial_block.cols();
  if (b < 1) throw ParameterError("LOBPCG needs a block of at least one vector");
  if (initial_block.rows() != n) throw LayoutError("initial block height mismatch");
  if (3 * b > n) throw ParameterError("LOBPCG block too large for the operator");
  if (options.tolerance <= 0.0 || options.max_iterations < 0) {
    throw ParameterError("LOBPCG tolerance and iteration limit must be positive");
  }

  MatrixXcd x = svqb(initial_block, kDropTolerance);
  if (x.cols() != b) throw ParameterError("initial LOBPCG block is rank deficient");

  LobpcgResult result;
  auto rayleigh_ritz = [&](const MatrixXcd& s, const MatrixXcd& as) {
    MatrixXcd g = s.adjoint() * as;
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
    if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz failed");
    return std::make_pair(VectorXd(es.eigenvalues().head(b)),
                          MatrixXcd(es.eigenvectors().leftCols(b)));
  };

  MatrixXcd ax = op.apply(x);
  {
    auto [theta, c] = rayleigh_ritz(x, ax);
    x = x * c;
    ax = ax * c;
    result.values = theta;
  }
  result.ritz_history.push_back(result.values);

  MatrixXcd p(n, 0);
  for (int it = 0;; ++it) {
    const MatrixXcd r = ax - x * result.values.asDiagonal();
    const VectorXd rnorm = r.colwise().norm().transpose();
    result.max_residual_history.push_back(rnorm.maxCoeff());
    std::vector<Index> active;
    for (Index j = 0; j < b; ++j) {
      if (rnorm[j] >= options.tolerance) active.push_back(j);
    }
    if (active.empty()) {
      result.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;

    MatrixXcd ra(n, static_cast<Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
      ra.col(static_cast<Index>(j)) = r.col(active[j]);
    }
    MatrixXcd w = precond.apply(ra);
    project_out(w, x);
    w = svqb(w, kDropTolerance);

    MatrixXcd pa(n, 0);
    if (p.cols() > 0) {
      pa.resize(n, static_cast<Index>(active.size()));
      for (std::size_t j = 0; j < active.size(); ++j) {
        pa.col(static_cast<Index>(j)) = p.col(active[j]);
      }
      project_out(pa, x);
      project_out(pa, w);
      MatrixXcd q = svqb(pa, kDropTolerance);
      if (q.cols() < pa.cols()) {
        ++result.restarts;
        q.resize(n, 0);
      }
      pa = std::move(q);
    }
    if (w.cols() == 0 && pa.cols() == 0) {
      ++result.restarts;
      break;  // search space exhausted; report the partial result
    }

    const MatrixXcd aw = op.apply(w);
    const MatrixXcd apa = pa.cols() > 0 ? op.apply(pa) : MatrixXcd(n, 0);
    const MatrixXcd s = hstack({&x, &w, &pa}, n);
    const MatrixXcd as = hstack({&ax, &aw, &apa}, n);
    auto [theta, c] = rayleigh_ritz(s, as);

    // New conjugate directions: the part of X_new outside span(X).
    const Index rest = s.cols() - b;
    p = s.rightCols(rest) * c.bottomRows(rest);
    x = s * c;
    ax = as * c;
    result.values = theta;
    result.ritz_history.push_back(theta);
    result.iterations = it + 1;
  }
  result.vectors = x;
  for (Index j = 0; j < b; ++j) {
    Eigen::VectorXcd v = result.vectors.col(j);
    fix_phase(v);
    result.vectors.col(j) = v;
  }
  return result;
}

}  // namespace qofdft
