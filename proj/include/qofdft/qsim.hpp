#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qofdft/cell.hpp"

namespace qofdft {

using cplx = std::complex<double>;

enum class RegisterKind : std::uint32_t {
  kDensityAxis1 = 1,
  kDensityAxis2 = 2,
  kDensityAxis3 = 3,
  kPiteAncilla = 4,
  kQpeAncilla = 5,
  kRedundancy = 6,
  kGeneric = 7,
};

/// A contiguous block of qubits; qubit `offset` is the least significant.
struct QubitRange {
  int offset = 0;
  int width = 0;

  std::size_t dimension() const { return std::size_t{1} << width; }
  bool contains(int qubit) const {
    return qubit >= offset && qubit < offset + width;
  }
  friend bool operator==(const QubitRange&, const QubitRange&) = default;
};

struct Register {
  std::string name;
  RegisterKind kind = RegisterKind::kGeneric;
  QubitRange qubits;

  friend bool operator==(const Register&, const Register&) = default;
};

/// Ordered register descriptors, least significant register first. Registers
/// tile [0, num_qubits()) without gaps.
class Layout {
 public:
  Layout() = default;

  /// Density register of `cell`: axis 3 in the lowest qubits, then axis 2,
  /// then axis 1, so the basis index equals the cell's linear grid index.
  static Layout density(const SimulationCell& cell);
  static Layout generic(int qubits, std::string name = "system");

  /// Appends a register above the current most significant qubit.
  Layout& append(std::string name, RegisterKind kind, int width);

  const std::vector<Register>& registers() const { return registers_; }
  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return std::size_t{1} << num_qubits_; }

  const Register& find(RegisterKind kind) const;
  const Register& find(std::string_view name) const;
  const Register* find_if(RegisterKind kind) const;

  /// Range spanned by the three density axes, which must be contiguous and
  /// start at qubit 0.
  QubitRange density_range() const;
  bool matches_cell(const SimulationCell& cell) const;

  /// Layout with `qubit` removed; the owning register shrinks by one qubit
  /// and disappears when empty. Higher qubits shift down by one.
  Layout without_qubit(int qubit) const;

  friend bool operator==(const Layout&, const Layout&) = default;

 private:
  std::vector<Register> registers_;
  int num_qubits_ = 0;
};

/// Dense complex amplitude vector over a register layout.
class StateVector {
 public:
  explicit StateVector(Layout layout);  // all amplitudes zero
  StateVector(Layout layout, std::vector<cplx> amplitudes);

  const Layout& layout() const { return layout_; }
  int num_qubits() const { return layout_.num_qubits(); }
  std::size_t dimension() const { return amplitudes_.size(); }

  std::span<cplx> amplitudes() { return amplitudes_; }
  std::span<const cplx> amplitudes() const { return amplitudes_; }
  cplx& operator[](std::size_t i) { return amplitudes_[i]; }
  const cplx& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm2() const;
  /// Rescales to unit norm; throws PostSelectionError on a zero vector.
  void normalize();

  Eigen::Map<Eigen::VectorXcd> as_eigen() {
    return {amplitudes_.data(), static_cast<Eigen::Index>(amplitudes_.size())};
  }
  Eigen::Map<const Eigen::VectorXcd> as_eigen() const {
    return {amplitudes_.data(), static_cast<Eigen::Index>(amplitudes_.size())};
  }

 private:
  Layout layout_;
  std::vector<cplx> amplitudes_;
};

StateVector prepare_basis(const Layout& layout, std::size_t index);

/// Multiplies the amplitude of target-register basis state j by
/// exp(-i phases[j]) on every branch of the remaining qubits.
void apply_diagonal_phase(StateVector& state, const QubitRange& target,
                          std::span<const double> phases);

/// Multiplies target-register basis state j by factors[j]. Not unitary in
/// general; callers that need a normalized state renormalize themselves.
void apply_diagonal(StateVector& state, const QubitRange& target,
                    std::span<const cplx> factors);

void apply_matrix(StateVector& state, const QubitRange& target,
                  const Eigen::MatrixXcd& matrix);

void apply_single_qubit(StateVector& state, int qubit,
                        const Eigen::Matrix2cd& gate);

namespace gates {
Eigen::Matrix2cd hadamard();
Eigen::Matrix2cd pauli_x();
/// W = (1/sqrt2) [[1, -i], [1, i]], the PITE ancilla rotation.
Eigen::Matrix2cd pite_w();
}  // namespace gates

/// Centered quantum Fourier transform on one register:
///   CQFT |k> = N^{-1/2} sum_j exp(2 pi i (k - N/2) j / N) |j>.
/// Implemented as the unnormalized backward DFT followed by the centering
/// phase (-1)^j. `inverse` applies CQFT^dagger.
void cqft(StateVector& state, const QubitRange& target, bool inverse = false);

/// CQFT along density axis `axis` in {0, 1, 2}.
void cqft_axis(StateVector& state, int axis, bool inverse = false);

/// CQFT_1 (x) CQFT_2 (x) CQFT_3 on the density register.
void cqft_3d(StateVector& state, bool inverse = false);

struct DenseUnitary {
  QubitRange target;
  Eigen::MatrixXcd matrix;
};

struct DiagonalPhase {
  QubitRange target;
  std::vector<double> phases;
};

/// An arbitrary operation run on the control-matching branch. The branch is
/// handed over as a StateVector whose layout is the original layout without
/// the control qubit; the callable must act linearly and must not
/// renormalize.
struct Subroutine {
  std::function<void(StateVector&)> apply;
};

using UnitarySpec = std::variant<DenseUnitary, DiagonalPhase, Subroutine>;

/// Applies `spec` on the branch where `control` equals `control_value`.
void apply_controlled(StateVector& state, int control, int control_value,
                      const UnitarySpec& spec);

struct MeasurementRecord {
  int outcome = 0;
  double probability = 0.0;
  /// Renormalized post-measurement state; empty for a zero-probability branch.
  std::optional<StateVector> state;
};

struct MeasurementBranches {
  MeasurementRecord zero;
  MeasurementRecord one;
};

/// Deterministic mode: both branches with their probabilities.
MeasurementBranches measure_qubit(const StateVector& state, int qubit);

/// Projects onto `qubit == value` in place and renormalizes. Returns the
/// branch probability. Throws PostSelectionError when it is below 1e-300.
double postselect(StateVector& state, int qubit, int value);

/// Sampling mode: draws one outcome from `rng` and collapses the state.
MeasurementRecord sample_measurement(StateVector& state, int qubit,
                                     std::mt19937_64& rng);

/// Probability that `qubit` reads 1.
double probability_one(const StateVector& state, int qubit);

/// Removes a qubit that is in a definite basis state (weight on the other
/// value at most `tolerance`). Throws ReadoutError otherwise.
StateVector drop_qubit(const StateVector& state, int qubit,
                       double tolerance = 1e-10);

/// Appends a fresh register of width 1 in |0> as the new top qubit.
StateVector add_qubit(const StateVector& state, std::string name,
                      RegisterKind kind);

/// <a|b>. Layouts must agree.
cplx overlap(const StateVector& a, const StateVector& b);

/// Binary snapshot: magic "QOFDSTV1", u32 n_total, u32 n_registers, then per
/// register u32 kind, u32 offset, u32 width, u32 name length, name bytes;
/// followed by 2^n_total little-endian (re, im) double pairs.
void write_snapshot(const StateVector& state, const std::filesystem::path& path);
StateVector read_snapshot(const std::filesystem::path& path);

}  // namespace qofdft
