#include "qofdft/qsim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "qofdft/errors.hpp"
#include "qofdft/fft.hpp"
#include "qofdft/parallel.hpp"

namespace qofdft {

namespace {

constexpr char kSnapshotMagic[8] = {'Q', 'O', 'F', 'D', 'S', 'T', 'V', '1'};
constexpr double kMinBranchProbability = 1e-300;

std::size_t mask_of(int width) { return (std::size_t{1} << width) - 1; }

void check_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits()) {
    throw LayoutError("qubit " + std::to_string(qubit) + " outside a " +
                      std::to_string(state.num_qubits()) + "-qubit state");
  }
}

void check_range(const StateVector& state, const QubitRange& r) {
  if (r.offset < 0 || r.width < 0 || r.offset + r.width > state.num_qubits()) {
    throw LayoutError("qubit range [" + std::to_string(r.offset) + ", " +
                      std::to_string(r.offset + r.width) + ") outside a " +
                      std::to_string(state.num_qubits()) + "-qubit state");
  }
}

/// Inserts a zero bit at position `qubit` of `reduced`.
std::size_t insert_bit(std::size_t reduced, int qubit, int value) {
  const std::size_t low = reduced & mask_of(qubit);
  const std::size_t high = reduced >> qubit;
  return (high << (qubit + 1)) | (static_cast<std::size_t>(value) << qubit) |
         low;
}

// Little-endian byte IO, independent of host order.
void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw IoError("truncated state snapshot");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw IoError("truncated state snapshot");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Layout

Layout Layout::density(const SimulationCell& cell) {
  Layout layout;
  layout.append("axis3", RegisterKind::kDensityAxis3, cell.qubits(2));
  layout.append("axis2", RegisterKind::kDensityAxis2, cell.qubits(1));
  layout.append("axis1", RegisterKind::kDensityAxis1, cell.qubits(0));
  return layout;
}

Layout Layout::generic(int qubits, std::string name) {
  Layout layout;
  layout.append(std::move(name), RegisterKind::kGeneric, qubits);
  return layout;
}

Layout& Layout::append(std::string name, RegisterKind kind, int width) {
  if (width < 1) throw LayoutError("register width must be positive");
  for (const auto& r : registers_) {
    if (r.name == name) throw LayoutError("duplicate register name " + name);
  }
  if (num_qubits_ + width > 40) {
    throw LayoutError("layout exceeds 40 qubits");
  }
  registers_.push_back({std::move(name), kind, {num_qubits_, width}});
  num_qubits_ += width;
  return *this;
}

const Register* Layout::find_if(RegisterKind kind) const {
  for (const auto& r : registers_) {
    if (r.kind == kind) return &r;
  }
  return nullptr;
}

const Register& Layout::find(RegisterKind kind) const {
  const Register* r = find_if(kind);
  if (r == nullptr) {
    throw LayoutError("layout has no register of kind " +
                      std::to_string(static_cast<std::uint32_t>(kind)));
  }
  return *r;
}

const Register& Layout::find(std::string_view name) const {
  for (const auto& r : registers_) {
    if (r.name == name) return r;
  }
  throw LayoutError("layout has no register named " + std::string(name));
}

QubitRange Layout::density_range() const {
  const Register& a3 = find(RegisterKind::kDensityAxis3);
  const Register& a2 = find(RegisterKind::kDensityAxis2);
  const Register& a1 = find(RegisterKind::kDensityAxis1);
  if (a3.qubits.offset != 0 ||
      a2.qubits.offset != a3.qubits.offset + a3.qubits.width ||
      a1.qubits.offset != a2.qubits.offset + a2.qubits.width) {
    throw LayoutError("density axes must be contiguous from qubit 0");
  }
  return {0, a1.qubits.offset + a1.qubits.width};
}

bool Layout::matches_cell(const SimulationCell& cell) const {
  const Register* a1 = find_if(RegisterKind::kDensityAxis1);
  const Register* a2 = find_if(RegisterKind::kDensityAxis2);
  const Register* a3 = find_if(RegisterKind::kDensityAxis3);
  if (!a1 || !a2 || !a3) return false;
  if (a1->qubits.width != cell.qubits(0) || a2->qubits.width != cell.qubits(1) ||
      a3->qubits.width != cell.qubits(2)) {
    return false;
  }
  try {
    (void)density_range();
  } catch (const LayoutError&) {
    return false;
  }
  return true;
}

Layout Layout::without_qubit(int qubit) const {
  if (qubit < 0 || qubit >= num_qubits_) {
    throw LayoutError("qubit " + std::to_string(qubit) + " not in layout");
  }
  Layout out;
  for (const auto& r : registers_) {
    int width = r.qubits.width;
    if (r.qubits.contains(qubit)) --width;
    if (width > 0) out.append(r.name, r.kind, width);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Layout layout)
    : layout_(std::move(layout)), amplitudes_(layout_.dimension(), cplx{}) {}

StateVector::StateVector(Layout layout, std::vector<cplx> amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.dimension()) {
    throw LayoutError("amplitude count " + std::to_string(amplitudes_.size()) +
                      " does not match layout dimension " +
                      std::to_string(layout_.dimension()));
  }
}

double StateVector::norm2() const { return deterministic_norm2(amplitudes_); }

void StateVector::normalize() {
  const double n2 = norm2();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw PostSelectionError("cannot normalize a state of squared norm " +
                             std::to_string(n2));
  }
  const double s = 1.0 / std::sqrt(n2);
  const auto n = static_cast<std::ptrdiff_t>(amplitudes_.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) amplitudes_[i] *= s;
}

StateVector prepare_basis(const Layout& layout, std::size_t index) {
  if (index >= layout.dimension()) {
    throw LayoutError("basis index " + std::to_string(index) +
                      " overflows a " + std::to_string(layout.num_qubits()) +
                      "-qubit layout");
  }
  StateVector state(layout);
  state[index] = 1.0;
  return state;
}

// ---------------------------------------------------------------------------
// Diagonal and dense operators

void apply_diagonal(StateVector& state, const QubitRange& target,
                    std::span<const cplx> factors) {
  check_range(state, target);
  if (factors.size() != target.dimension()) {
    throw LayoutError("diagonal of length " + std::to_string(factors.size()) +
                      " does not match register dimension " +
                      std::to_string(target.dimension()));
  }
  auto amps = state.amplitudes();
  const std::size_t mask = mask_of(target.width);
  const auto n = static_cast<std::ptrdiff_t>(amps.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    amps[i] *= factors[(static_cast<std::size_t>(i) >> target.offset) & mask];
  }
}

void apply_diagonal_phase(StateVector& state, const QubitRange& target,
                          std::span<const double> phases) {
  if (phases.size() != target.dimension()) {
    throw LayoutError("phase array of length " + std::to_string(phases.size()) +
                      " does not match register dimension " +
                      std::to_string(target.dimension()));
  }
  std::vector<cplx> factors(phases.size());
  for (std::size_t j = 0; j < phases.size(); ++j) {
    factors[j] = std::polar(1.0, -phases[j]);
  }
  apply_diagonal(state, target, factors);
}

void apply_matrix(StateVector& state, const QubitRange& target,
                  const Eigen::MatrixXcd& matrix) {
  check_range(state, target);
  const auto d = static_cast<Eigen::Index>(target.dimension());
  if (matrix.rows() != d || matrix.cols() != d) {
    throw LayoutError("matrix of size " + std::to_string(matrix.rows()) + "x" +
                      std::to_string(matrix.cols()) +
                      " does not match register dimension " +
                      std::to_string(d));
  }
  auto amps = state.amplitudes();
  const std::size_t low = std::size_t{1} << target.offset;
  const std::size_t block = low * target.dimension();
  const std::size_t outer = amps.size() / block;
  const auto bases = static_cast<std::ptrdiff_t>(outer * low);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < bases; ++b) {
    const std::size_t base = (static_cast<std::size_t>(b) / low) * block +
                             static_cast<std::size_t>(b) % low;
    Eigen::VectorXcd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = amps[base + j * low];
    const Eigen::VectorXcd w = matrix * v;
    for (Eigen::Index j = 0; j < d; ++j) amps[base + j * low] = w[j];
  }
}

void apply_single_qubit(StateVector& state, int qubit,
                        const Eigen::Matrix2cd& gate) {
  check_qubit(state, qubit);
  auto amps = state.amplitudes();
  const std::size_t bit = std::size_t{1} << qubit;
  const auto half = static_cast<std::ptrdiff_t>(amps.size() / 2);
  const cplx g00 = gate(0, 0), g01 = gate(0, 1), g10 = gate(1, 0),
             g11 = gate(1, 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < half; ++r) {
    const std::size_t i0 = insert_bit(static_cast<std::size_t>(r), qubit, 0);
    const std::size_t i1 = i0 | bit;
    const cplx a0 = amps[i0], a1 = amps[i1];
    amps[i0] = g00 * a0 + g01 * a1;
    amps[i1] = g10 * a0 + g11 * a1;
  }
}

namespace gates {

Eigen::Matrix2cd hadamard() {
  const double s = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix2cd h;
  h << s, s, s, -s;
  return h;
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  return x;
}

Eigen::Matrix2cd pite_w() {
  const double s = 1.0 / std::numbers::sqrt2;
  const cplx i{0.0, 1.0};
  Eigen::Matrix2cd w;
  w << s, -i * s, s, i * s;
  return w;
}

}  // namespace gates

// ---------------------------------------------------------------------------
// Centered QFT

void cqft(StateVector& state, const QubitRange& target, bool inverse) {
  check_range(state, target);
  const std::size_t n = target.dimension();
  std::vector<cplx> centering(n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) centering[j] = (j % 2 == 0) ? s : -s;

  const std::size_t stride = std::size_t{1} << target.offset;
  if (!inverse) {
    fft::transform_axis(state.amplitudes(), n, stride, fft::Direction::kBackward);
    apply_diagonal(state, target, centering);
  } else {
    apply_diagonal(state, target, centering);
    fft::transform_axis(state.amplitudes(), n, stride, fft::Direction::kForward);
  }
}

void cqft_axis(StateVector& state, int axis, bool inverse) {
  static constexpr RegisterKind kinds[3] = {RegisterKind::kDensityAxis1,
                                            RegisterKind::kDensityAxis2,
                                            RegisterKind::kDensityAxis3};
  if (axis < 0 || axis > 2) {
    throw LayoutError("density axis must be 0, 1 or 2");
  }
  cqft(state, state.layout().find(kinds[axis]).qubits, inverse);
}

void cqft_3d(StateVector& state, bool inverse) {
  for (int axis = 0; axis < 3; ++axis) cqft_axis(state, axis, inverse);
}

// ---------------------------------------------------------------------------
// Controlled operations

void apply_controlled(StateVector& state, int control, int control_value,
                      const UnitarySpec& spec) {
  check_qubit(state, control);
  if (control_value != 0 && control_value != 1) {
    throw ParameterError("control value must be 0 or 1");
  }

  // Target ranges are expressed in the full layout; shift them into the
  // reduced branch layout.
  auto reduce_range = [&](const QubitRange& r) {
    check_range(state, r);
    if (r.contains(control)) {
      throw LayoutError("control qubit " + std::to_string(control) +
                        " overlaps the target register");
    }
    QubitRange out = r;
    if (r.offset > control) --out.offset;
    return out;
  };

  std::function<void(StateVector&)> op;
  if (const auto* u = std::get_if<DenseUnitary>(&spec)) {
    const QubitRange r = reduce_range(u->target);
    op = [r, u](StateVector& s) { apply_matrix(s, r, u->matrix); };
  } else if (const auto* p = std::get_if<DiagonalPhase>(&spec)) {
    const QubitRange r = reduce_range(p->target);
    op = [r, p](StateVector& s) { apply_diagonal_phase(s, r, p->phases); };
  } else {
    op = std::get<Subroutine>(spec).apply;
  }

  auto amps = state.amplitudes();
  StateVector branch(state.layout().without_qubit(control));
  auto b = branch.amplitudes();
  const auto nb = static_cast<std::ptrdiff_t>(b.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nb; ++r) {
    b[r] = amps[insert_bit(static_cast<std::size_t>(r), control, control_value)];
  }
  op(branch);
  if (branch.dimension() != b.size()) {
    throw LayoutError("controlled subroutine changed the branch dimension");
  }
  b = branch.amplitudes();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nb; ++r) {
    amps[insert_bit(static_cast<std::size_t>(r), control, control_value)] = b[r];
  }
}

// ---------------------------------------------------------------------------
// Measurement

double probability_one(const StateVector& state, int qubit) {
  check_qubit(state, qubit);
  const auto amps = state.amplitudes();
  const std::size_t half = amps.size() / 2;
  const std::size_t bit = std::size_t{1} << qubit;
  return chunked_sum(half, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      s += std::norm(amps[insert_bit(r, qubit, 0) | bit]);
    }
    return s;
  });
}

namespace {

double branch_probability(const StateVector& state, int qubit, int value) {
  const auto amps = state.amplitudes();
  const std::size_t half = amps.size() / 2;
  return chunked_sum(half, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      s += std::norm(amps[insert_bit(r, qubit, value)]);
    }
    return s;
  });
}

/// Zeroes the branch qubit != value and rescales by 1/sqrt(p).
void project(StateVector& state, int qubit, int value, double p) {
  auto amps = state.amplitudes();
  const std::size_t bit = std::size_t{1} << qubit;
  const double s = 1.0 / std::sqrt(p);
  const auto n = static_cast<std::ptrdiff_t>(amps.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const int v = (static_cast<std::size_t>(i) & bit) ? 1 : 0;
    amps[i] = (v == value) ? amps[i] * s : cplx{};
  }
}

}  // namespace

MeasurementBranches measure_qubit(const StateVector& state, int qubit) {
  check_qubit(state, qubit);
  MeasurementBranches out;
  const double p0 = branch_probability(state, qubit, 0);
  const double p1 = branch_probability(state, qubit, 1);
  // Both branch weights are computed from the same amplitudes; dividing by
  // their sum keeps p0 + p1 = 1 even for a slightly unnormalized input.
  const double total = p0 + p1;
  out.zero.outcome = 0;
  out.zero.probability = p0 / total;
  out.one.outcome = 1;
  out.one.probability = p1 / total;
  if (p0 >= kMinBranchProbability) {
    out.zero.state = state;
    project(*out.zero.state, qubit, 0, p0);
  }
  if (p1 >= kMinBranchProbability) {
    out.one.state = state;
    project(*out.one.state, qubit, 1, p1);
  }
  return out;
}

double postselect(StateVector& state, int qubit, int value) {
  check_qubit(state, qubit);
  const double p = branch_probability(state, qubit, value);
  if (!(p >= kMinBranchProbability)) {
    throw PostSelectionError("post-selection of qubit " +
                             std::to_string(qubit) + " = " +
                             std::to_string(value) +
                             " has vanishing probability " + std::to_string(p));
  }
  project(state, qubit, value, p);
  return p;
}

MeasurementRecord sample_measurement(StateVector& state, int qubit,
                                     std::mt19937_64& rng) {
  check_qubit(state, qubit);
  const double p1 = probability_one(state, qubit);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const int outcome = u < p1 ? 1 : 0;
  MeasurementRecord rec;
  rec.outcome = outcome;
  rec.probability = postselect(state, qubit, outcome);
  rec.state = state;
  return rec;
}

StateVector drop_qubit(const StateVector& state, int qubit, double tolerance) {
  check_qubit(state, qubit);
  const double p1 = branch_probability(state, qubit, 1);
  const double p0 = branch_probability(state, qubit, 0);
  int value = 0;
  if (p1 <= tolerance) {
    value = 0;
  } else if (p0 <= tolerance) {
    value = 1;
  } else {
    throw ReadoutError("qubit " + std::to_string(qubit) +
                       " is not in a definite basis state (p0 = " +
                       std::to_string(p0) + ", p1 = " + std::to_string(p1) +
                       ")");
  }
  StateVector out(state.layout().without_qubit(qubit));
  auto o = out.amplitudes();
  const auto amps = state.amplitudes();
  for (std::size_t r = 0; r < o.size(); ++r) {
    o[r] = amps[insert_bit(r, qubit, value)];
  }
  return out;
}

StateVector add_qubit(const StateVector& state, std::string name,
                      RegisterKind kind) {
  Layout layout = state.layout();
  layout.append(std::move(name), kind, 1);
  StateVector out(std::move(layout));
  const auto amps = state.amplitudes();
  std::copy(amps.begin(), amps.end(), out.amplitudes().begin());
  return out;
}

cplx overlap(const StateVector& a, const StateVector& b) {
  if (!(a.layout() == b.layout())) {
    throw LayoutError("overlap of states with different layouts");
  }
  return deterministic_dot(a.amplitudes(), b.amplitudes());
}

// ---------------------------------------------------------------------------
// Snapshots

void write_snapshot(const StateVector& state,
                    const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kSnapshotMagic, sizeof kSnapshotMagic);
  const Layout& layout = state.layout();
  put_u32(os, static_cast<std::uint32_t>(layout.num_qubits()));
  put_u32(os, static_cast<std::uint32_t>(layout.registers().size()));
  for (const auto& r : layout.registers()) {
    put_u32(os, static_cast<std::uint32_t>(r.kind));
    put_u32(os, static_cast<std::uint32_t>(r.qubits.offset));
    put_u32(os, static_cast<std::uint32_t>(r.qubits.width));
    put_u32(os, static_cast<std::uint32_t>(r.name.size()));
    os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
  }
  for (const cplx& a : state.amplitudes()) {
    put_f64(os, a.real());
    put_f64(os, a.imag());
  }
  if (!os) throw IoError("failed writing " + path.string());
}

StateVector read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0) {
    throw IoError(path.string() + " is not a state snapshot");
  }
  const std::uint32_t n_total = get_u32(is);
  const std::uint32_t n_regs = get_u32(is);
  Layout layout;
  for (std::uint32_t k = 0; k < n_regs; ++k) {
    const auto kind = static_cast<RegisterKind>(get_u32(is));
    const std::uint32_t offset = get_u32(is);
    const std::uint32_t width = get_u32(is);
    const std::uint32_t len = get_u32(is);
    if (len > 4096) throw IoError("corrupt register name in " + path.string());
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw IoError("truncated state snapshot");
    if (static_cast<int>(offset) != layout.num_qubits()) {
      throw IoError("register " + name + " is not contiguous in snapshot");
    }
    layout.append(std::move(name), kind, static_cast<int>(width));
  }
  if (static_cast<std::uint32_t>(layout.num_qubits()) != n_total) {
    throw IoError("register widths do not add up to n_total in snapshot");
  }
  std::vector<cplx> amps(layout.dimension());
  for (auto& a : amps) {
    const double re = get_f64(is);
    const double im = get_f64(is);
    a = {re, im};
  }
  return StateVector(std::move(layout), std::move(amps));
}

}  // namespace qofdft
