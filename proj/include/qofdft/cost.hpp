#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace qofdft::cost {

/// Resources under the gate set {arbitrary one-qubit, CNOT, controlled
/// phase}. Depth counts layers of gates on disjoint qubits.
struct ResourceEstimate {
  std::uint64_t depth = 0;
  std::uint64_t gates = 0;
  std::uint64_t qubits = 0;
};

enum class GateKind {
  kHadamard,
  kPauliX,
  kPhase,   // diag(1, exp(i angle)) on q0
  kCnot,    // control q0, target q1
  kCPhase,  // diag(1, 1, 1, exp(i angle)) on (q0, q1)
};

struct Gate {
  GateKind kind = GateKind::kHadamard;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
};

/// Toffoli (controls c1, c2, target t) as seven gates: H on t, then the
/// controlled-S sequence CS(c2,t) CNOT(c1,c2) CS^dagger(c2,t) CNOT(c1,c2)
/// CS(c1,t), then H on t.
void append_toffoli(std::vector<Gate>& out, int c1, int c2, int t);

/// X on `target` controlled by all of `controls`, with `dirty` qubits
/// borrowed in an arbitrary state and restored. Needs controls.size() - 2
/// dirty qubits: a chain of 4 (m - 2) Toffolis for m >= 3 controls.
void append_multi_controlled_x(std::vector<Gate>& out, const std::vector<int>& controls,
                               int target, const std::vector<int>& dirty);

/// Selector P_j^(n)(phi) = I + (exp(i phi) - 1)|j><j| on qubits [0, n), with
/// one clean ancilla at qubit n for n >= 3. Qubit b of the register carries
/// bit b of j. Structure: X on every qubit whose bit of j is 0; then the
/// phase on |1...1>:
///   n = 1  a phase gate,
///   n = 2  one controlled phase,
///   n >= 3 the ancilla flips to AND(q_0 .. q_{n-2}), a controlled phase
///          joins it to q_{n-1}, and the flip is undone. The flip is the
///          controlled-X with one borrowed qubit (q_{n-1}): the controls split
///          into halves A1 (ceil) and A2, and
///          C(A1 -> q_{n-1}), C(A2 + q_{n-1} -> anc), C(A1 -> q_{n-1}),
///          C(A2 + q_{n-1} -> anc), each a dirty-ancilla Toffoli chain;
/// then the X gates again.
std::vector<Gate> selector_circuit(int n, std::uint64_t j, double phi);

/// ASAP layering: each gate goes one layer after the latest layer used on
/// any of its qubits.
std::uint64_t circuit_depth(const std::vector<Gate>& gates);

/// Largest qubit index used, plus one.
int circuit_width(const std::vector<Gate>& gates);

/// CNOT doubling tree copying an n_org-qubit register into `copies`
/// redundant registers.
ResourceEstimate fanout_estimate(std::uint64_t copies, int n_org);

/// Closed form of the layered selector circuit. Undressed (j = 2^n - 1):
///   n <= 8: tabulated,
///   n >= 9: depth = 88 n - 378 (even n) or 88 n - 373 (odd n),
///           gates = 112 n - 447.
/// The X dressing is counted as two extra layers (an upper bound; ASAP
/// layering may hide a dressing layer) and two gates per zero bit of j.
/// Without `j` the fully dressed case j = 0 is reported.
ResourceEstimate selector_estimate(int n, std::optional<std::uint64_t> j = 0);

struct SelectorConstants {
  std::int64_t depth_slope = 0;        // layers per register qubit
  std::int64_t depth_offset_even = 0;  // even n >= 9
  std::int64_t depth_offset_odd = 0;   // odd n >= 9
  std::int64_t gate_slope = 0;
  std::int64_t gate_offset = 0;
};
SelectorConstants selector_depth_constants();

/// Potential RTE with `groups` redundant registers: fan out the density
/// register (groups - 1 copies), apply ceil(N_g / groups) dressed selectors
/// per register in parallel, fan back in.
ResourceEstimate potential_rte_estimate(std::uint64_t n_g, std::uint64_t groups);

/// CQFT on one n_q-qubit axis: n_q Hadamards, n_q (n_q - 1)/2 controlled
/// phases and one centering Z.
ResourceEstimate cqft_estimate(int n_q);
/// U_kin,l: n_q one-qubit phases and n_q (n_q - 1)/2 controlled phases.
ResourceEstimate kinetic_axis_phase_estimate(int n_q);
/// U_kin,ll': n_q^2 controlled phases and 2 n_q one-qubit phases.
ResourceEstimate kinetic_cross_estimate(int n_q);
/// One axis: CQFT^dagger, U_kin,l, CQFT.
ResourceEstimate kinetic_single_axis_estimate(int n_q);
/// Three axes plus the three cross terms.
ResourceEstimate kinetic_gate_estimate(int n_q);

struct SweepRow {
  std::uint64_t n_g = 0;
  ResourceEstimate estimate;
};

/// potential_rte_estimate over N_g = 2^min_qubits .. 2^max_qubits; groups = 0
/// means full redundancy (groups = N_g).
std::vector<SweepRow> potential_sweep(int min_qubits, int max_qubits,
                                      std::uint64_t groups = 0);

/// CSV with header N_g,qubits,depth,gates.
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows);

}  // namespace qofdft::cost
