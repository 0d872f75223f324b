#include "qofdft/cost.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "qofdft/errors.hpp"

namespace qofdft::cost {

namespace {

constexpr double kPi = std::numbers::pi;

void append_cphase(std::vector<Gate>& out, int a, int b, double angle) {
  out.push_back({GateKind::kCPhase, a, b, angle});
}

void append_cnot(std::vector<Gate>& out, int c, int t) {
  out.push_back({GateKind::kCnot, c, t, 0.0});
}

/// Borrowed-qubit Toffoli chain: controls x_1..x_m, target z, dirty d_1..d_{m-2}.
void append_toffoli_chain(std::vector<Gate>& out, const std::vector<int>& x, int z,
                          const std::vector<int>& d) {
  const std::size_t m = x.size();
  auto step = [&](std::size_t i) {  // T(x_i, d_{i-2} -> d_{i-1}), 1-based i
    append_toffoli(out, x[i - 1], d[i - 3], d[i - 2]);
  };
  auto descend_ascend = [&] {
    for (std::size_t i = m - 1; i >= 3; --i) step(i);
    append_toffoli(out, x[0], x[1], d[0]);
    for (std::size_t i = 3; i <= m - 1; ++i) step(i);
  };
  append_toffoli(out, x[m - 1], d[m - 3], z);
  descend_ascend();
  append_toffoli(out, x[m - 1], d[m - 3], z);
  descend_ascend();
}

std::uint64_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(x - 1));
}

std::uint64_t unset_bits(std::uint64_t j, int n) {
  const std::uint64_t mask = n >= 64 ? ~0ULL : ((1ULL << n) - 1);
  return static_cast<std::uint64_t>(std::popcount(~j & mask));
}

void check_width(int n, const char* what) {
  if (n < 1) throw ParameterError(std::string(what) + " needs at least one qubit");
  if (n > 62) throw ParameterError(std::string(what) + " register too wide");
}

}  // namespace

void append_toffoli(std::vector<Gate>& out, int c1, int c2, int t) {
  out.push_back({GateKind::kHadamard, t, -1, 0.0});
  append_cphase(out, c2, t, kPi / 2);
  append_cnot(out, c1, c2);
  append_cphase(out, c2, t, -kPi / 2);
  append_cnot(out, c1, c2);
  append_cphase(out, c1, t, kPi / 2);
  out.push_back({GateKind::kHadamard, t, -1, 0.0});
}

void append_multi_controlled_x(std::vector<Gate>& out, const std::vector<int>& controls,
                               int target, const std::vector<int>& dirty) {
  const std::size_t m = controls.size();
  if (m == 0) {
    out.push_back({GateKind::kPauliX, target, -1, 0.0});
  } else if (m == 1) {
    append_cnot(out, controls[0], target);
  } else if (m == 2) {
    append_toffoli(out, controls[0], controls[1], target);
  } else {
    if (dirty.size() < m - 2) {
      throw ParameterError("multi-controlled X needs " + std::to_string(m - 2) +
                           " borrowed qubits, got " + std::to_string(dirty.size()));
    }
    append_toffoli_chain(out, controls, target, dirty);
  }
}

std::vector<Gate> selector_circuit(int n, std::uint64_t j, double phi) {
  check_width(n, "selector");
  if (n < 64 && j >> n) throw ParameterError("selector index exceeds register");
  std::vector<Gate> out;
  std::vector<Gate> dressing;
  for (int b = 0; b < n; ++b) {
    if (((j >> b) & 1U) == 0) dressing.push_back({GateKind::kPauliX, b, -1, 0.0});
  }
  out.insert(out.end(), dressing.begin(), dressing.end());

  if (n == 1) {
    out.push_back({GateKind::kPhase, 0, -1, phi});
  } else if (n == 2) {
    append_cphase(out, 0, 1, phi);
  } else {
    const int anc = n;
    const int t = n - 1;
    std::vector<int> controls(static_cast<std::size_t>(n - 1));
    for (int b = 0; b < n - 1; ++b) controls[b] = b;

    std::vector<Gate> flip;
    const std::size_t k = controls.size();
    if (k <= 3) {
      append_multi_controlled_x(flip, controls, anc, {t});
    } else {
      const std::size_t m1 = k / 2;
      const std::vector<int> a1(controls.begin(), controls.begin() + m1);
      std::vector<int> a2(controls.begin() + m1, controls.end());
      std::vector<int> dirty1 = a2;
      dirty1.push_back(anc);
      std::vector<int> a2y = a2;
      a2y.push_back(t);
      for (int rep = 0; rep < 2; ++rep) {
        append_multi_controlled_x(flip, a1, t, dirty1);
        append_multi_controlled_x(flip, a2y, anc, a1);
      }
    }
    out.insert(out.end(), flip.begin(), flip.end());
    append_cphase(out, anc, t, phi);
    out.insert(out.end(), flip.begin(), flip.end());
  }
  out.insert(out.end(), dressing.begin(), dressing.end());
  return out;
}

std::uint64_t circuit_depth(const std::vector<Gate>& gates) {
  std::vector<std::uint64_t> level(static_cast<std::size_t>(circuit_width(gates)), 0);
  std::uint64_t depth = 0;
  for (const Gate& g : gates) {
    std::uint64_t l = level[g.q0];
    if (g.q1 >= 0) l = std::max(l, level[g.q1]);
    ++l;
    level[g.q0] = l;
    if (g.q1 >= 0) level[g.q1] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

int circuit_width(const std::vector<Gate>& gates) {
  int w = 0;
  for (const Gate& g : gates) w = std::max({w, g.q0 + 1, g.q1 + 1});
  return w;
}

ResourceEstimate fanout_estimate(std::uint64_t copies, int n_org) {
  check_width(n_org, "fanout");
  if (copies < 1) throw ParameterError("fanout needs at least one copy");
  const auto width = static_cast<std::uint64_t>(n_org);
  return {ceil_log2(copies + 1), copies * width, (copies + 1) * width};
}

namespace {

// Layered depth and gate count of the undressed selector for n <= 8, where
// the half-split chains are still too short for the periodic pattern.
struct SmallSelector {
  std::uint64_t depth;
  std::uint64_t gates;
};
constexpr SmallSelector kSmallSelector[] = {
    {1, 1}, {1, 1}, {15, 15}, {47, 57}, {106, 141}, {197, 253}, {242, 337}, {326, 449},
};

constexpr std::int64_t kSelectorDepthSlope = 88;
constexpr std::int64_t kSelectorDepthOffsetEven = -378;
constexpr std::int64_t kSelectorDepthOffsetOdd = -373;
constexpr std::int64_t kSelectorGateSlope = 112;
constexpr std::int64_t kSelectorGateOffset = -447;

}  // namespace

SelectorConstants selector_depth_constants() {
  return {kSelectorDepthSlope, kSelectorDepthOffsetEven, kSelectorDepthOffsetOdd,
          kSelectorGateSlope, kSelectorGateOffset};
}

ResourceEstimate selector_estimate(int n, std::optional<std::uint64_t> j) {
  check_width(n, "selector");
  ResourceEstimate e;
  if (n <= 8) {
    e.depth = kSmallSelector[n - 1].depth;
    e.gates = kSmallSelector[n - 1].gates;
  } else {
    const std::int64_t offset =
        n % 2 == 0 ? kSelectorDepthOffsetEven : kSelectorDepthOffsetOdd;
    e.depth = static_cast<std::uint64_t>(kSelectorDepthSlope * n + offset);
    e.gates = static_cast<std::uint64_t>(kSelectorGateSlope * n + kSelectorGateOffset);
  }
  e.qubits = static_cast<std::uint64_t>(n) + (n >= 3 ? 1 : 0);
  const std::uint64_t all_ones = (1ULL << n) - 1;
  const std::uint64_t unset = j ? unset_bits(*j, n) : static_cast<std::uint64_t>(n);
  if (j && *j > all_ones) throw ParameterError("selector index exceeds register");
  if (unset > 0) {
    e.depth += 2;
    e.gates += 2 * unset;
  }
  return e;
}

ResourceEstimate potential_rte_estimate(std::uint64_t n_g, std::uint64_t groups) {
  if (groups < 1) throw ParameterError("potential RTE needs at least one register group");
  if (n_g < 2 || !std::has_single_bit(n_g)) {
    throw ParameterError("N_g must be a power of two of at least 2");
  }
  if (groups > n_g) throw ParameterError("more register groups than grid points");
  const int n_org = std::countr_zero(n_g);
  const ResourceEstimate sel = selector_estimate(n_org);
  const std::uint64_t per_group = (n_g + groups - 1) / groups;
  ResourceEstimate e;
  e.depth = per_group * sel.depth;
  // Every j in [0, N_g) is applied once; X gates total 2 n_org N_g / 2.
  const ResourceEstimate bare = selector_estimate(n_org, (1ULL << n_org) - 1);
  e.gates = n_g * bare.gates + static_cast<std::uint64_t>(n_org) * n_g;
  e.qubits = groups * sel.qubits;
  if (groups > 1) {
    const ResourceEstimate fan = fanout_estimate(groups - 1, n_org);
    e.depth += 2 * fan.depth;
    e.gates += 2 * fan.gates;
  }
  return e;
}

ResourceEstimate cqft_estimate(int n_q) {
  check_width(n_q, "CQFT");
  const auto n = static_cast<std::uint64_t>(n_q);
  // Textbook QFT layering (2 n_q - 1) plus the centering Z on the top qubit,
  // which shares the last layer for n_q = 1 only when nothing else runs.
  return {2 * n, n + n * (n - 1) / 2 + 1, n};
}

ResourceEstimate kinetic_axis_phase_estimate(int n_q) {
  check_width(n_q, "kinetic phase");
  const auto n = static_cast<std::uint64_t>(n_q);
  // Pairwise phases in round-robin layers (n for odd n, n - 1 for even n),
  // then one layer of one-qubit phases.
  const std::uint64_t rounds = n == 1 ? 0 : (n % 2 == 1 ? n : n - 1);
  return {rounds + 1, n + n * (n - 1) / 2, n};
}

ResourceEstimate kinetic_cross_estimate(int n_q) {
  check_width(n_q, "kinetic cross term");
  const auto n = static_cast<std::uint64_t>(n_q);
  // Bipartite n x n controlled phases in n layers, then one-qubit phases.
  return {n + 1, n * n + 2 * n, 2 * n};
}

ResourceEstimate kinetic_single_axis_estimate(int n_q) {
  const ResourceEstimate q = cqft_estimate(n_q);
  const ResourceEstimate u = kinetic_axis_phase_estimate(n_q);
  return {2 * q.depth + u.depth, 2 * q.gates + u.gates, q.qubits};
}

ResourceEstimate kinetic_gate_estimate(int n_q) {
  const ResourceEstimate axis = kinetic_single_axis_estimate(n_q);
  const ResourceEstimate cross = kinetic_cross_estimate(n_q);
  // Axes run in parallel on disjoint registers. The three cross terms share
  // registers pairwise and run one after another between the CQFT halves.
  return {axis.depth + 3 * cross.depth, 3 * axis.gates + 3 * cross.gates,
          3 * axis.qubits};
}

std::vector<SweepRow> potential_sweep(int min_qubits, int max_qubits,
                                      std::uint64_t groups) {
  if (min_qubits < 1 || max_qubits < min_qubits || max_qubits > 40) {
    throw ParameterError("sweep range must satisfy 1 <= min <= max <= 40");
  }
  std::vector<SweepRow> rows;
  for (int q = min_qubits; q <= max_qubits; ++q) {
    const std::uint64_t n_g = 1ULL << q;
    const std::uint64_t g = groups == 0 ? n_g : std::min(groups, n_g);
    rows.push_back({n_g, potential_rte_estimate(n_g, g)});
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "N_g,qubits,depth,gates\n";
  for (const SweepRow& r : rows) {
    os << r.n_g << ',' << r.estimate.qubits << ',' << r.estimate.depth << ','
       << r.estimate.gates << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace qofdft::cost
