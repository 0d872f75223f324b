#include "qofdft/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/hash.hpp"

namespace qofdft {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Reads one JSON object, remembering which keys were consumed so that the
/// remainder can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path, const std::string& source)
      : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_ + ": " + qualified(key) + ": " + what);
  }

  std::string qualified(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "<root>" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key) || raw(key).is_null()) {
      if (has(key)) used_.insert(key);
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    if (raw(key).is_null()) return std::nullopt;
    return string(key, "");
  }

  template <std::size_t N>
  std::array<double, N> numbers(const std::string& key, std::array<double, N> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array() || v.size() != N) {
      fail(key, "expected an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) fail(key, "expected an array of numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  Reader child(const std::string& key) {
    return Reader(raw(key), qualified(key), source_);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

template <class E>
E enum_value(Reader& r, const std::string& key, E fallback,
             std::initializer_list<std::pair<const char*, E>> names) {
  if (!r.has(key)) return fallback;
  const std::string s = r.string(key, "");
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  r.fail(key, "unknown value '" + s + "' (allowed: " + allowed + ")");
}

template <class E>
const char* enum_name(E value, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, KineticModel>> kKineticNames = {
    {"thomas-fermi", KineticModel::kThomasFermi}, {"none", KineticModel::kNone}};
const std::initializer_list<std::pair<const char*, XcModel>> kXcNames = {
    {"lda-exchange", XcModel::kLdaExchange}, {"none", XcModel::kNone}};
const std::initializer_list<std::pair<const char*, MixingScheme>> kMixingNames = {
    {"broyden", MixingScheme::kBroyden}, {"linear", MixingScheme::kLinear}};
const std::initializer_list<std::pair<const char*, EnergyConvention>> kEnergyNames = {
    {"output", EnergyConvention::kOutputDensity},
    {"input", EnergyConvention::kInputDensity}};
const std::initializer_list<std::pair<const char*, PiteMode>> kPiteModeNames = {
    {"exact", PiteMode::kExact}, {"approximate", PiteMode::kApproximate}};
const std::initializer_list<std::pair<const char*, OracleSolver>> kSolverNames = {
    {"dense", OracleSolver::kDense}, {"lobpcg", OracleSolver::kLobpcg}};
const std::initializer_list<std::pair<const char*, RunMode>> kModeNames = {
    {"scf", RunMode::kScf},
    {"pite-demo", RunMode::kPiteDemo},
    {"qpe", RunMode::kQpe},
    {"cost", RunMode::kCost},
    {"oracle-scf", RunMode::kOracleScf}};

Vec3 read_vec3(Reader& r, const std::string& key, Vec3 fallback) {
  const auto a = r.numbers<3>(key, {fallback[0], fallback[1], fallback[2]});
  return {a[0], a[1], a[2]};
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

/// Canonical JSON of everything except the output directory and the hash.
json canonical(const RunConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["cell"] = {{"lattice", c.cell.lattice}, {"qubits", c.cell.qubits}};
  j["functionals"] = {{"kinetic", enum_name(c.functionals.kinetic, kKineticNames)},
                      {"xc", enum_name(c.functionals.xc, kXcNames)},
                      {"lambda", c.functionals.lambda}};
  j["electrons"] = c.electrons;
  j["initial_density"] =
      c.initial_density ? json(c.initial_density->string()) : json(nullptr);
  json wells = json::array();
  for (const GaussianWell& w : c.external.wells) {
    wells.push_back({{"center", vec3_json(w.center)}, {"depth", w.depth}, {"width", w.width}});
  }
  json ions = json::array();
  for (const SoftCoulomb& ion : c.external.ions) {
    ions.push_back({{"center", vec3_json(ion.center)},
                    {"charge", ion.charge},
                    {"softening", ion.softening}});
  }
  j["external_potential"] = {
      {"gaussian_wells", wells},
      {"soft_coulomb", ions},
      {"table", c.external.table ? json(c.external.table->string()) : json(nullptr)}};
  j["scf"] = {{"threshold", c.scf.threshold},
              {"max_iterations", c.scf.max_iterations},
              {"mixing",
               {{"scheme", enum_name(c.scf.mixing.scheme, kMixingNames)},
                {"alpha", c.scf.mixing.alpha},
                {"history", c.scf.mixing.history}}},
              {"energy", enum_name(c.scf.energy, kEnergyNames)},
              {"track_infidelity", c.scf.track_infidelity}};
  j["pite"] = {{"m0", c.scf.pite.m0},
               {"dtau", c.scf.pite.dtau},
               {"steps", c.scf.pite.steps},
               {"mode", enum_name(c.scf.pite.mode, kPiteModeNames)}};
  const QpeConfig& q = c.qpe.config;
  j["qpe"] = {{"dt", optional_json(q.dt)},
              {"prior_lower", optional_json(q.prior_lower)},
              {"prior_upper", optional_json(q.prior_upper)},
              {"prior_mean", optional_json(q.prior_mean)},
              {"prior_stddev", optional_json(q.prior_stddev)},
              {"samples", q.samples},
              {"target_stddev", q.target_stddev},
              {"grid_points", q.grid_points},
              {"max_k", q.max_k},
              {"trotter_steps", c.qpe.trotter_steps},
              {"prepare_with_pite", c.qpe.prepare_with_pite}};
  j["cost"] = {{"min_qubits", c.cost.min_qubits},
               {"max_qubits", c.cost.max_qubits},
               {"groups", c.cost.groups}};
  j["oracle"] = {{"solver", enum_name(c.oracle_solver, kSolverNames)}};
  return j;
}

RunConfig from_json(const json& root, const fs::path& base, const std::string& source) {
  Reader r(root, "", source);
  RunConfig c;
  c.mode = enum_value(r, "mode", c.mode, kModeNames);
  c.seed = r.unsigned_integer("seed", c.seed);
  if (auto out = r.optional_string("output_dir")) c.output_dir = resolve(base, *out);

  if (!r.has("cell")) r.fail("cell", "missing required section");
  {
    Reader cell = r.child("cell");
    c.cell.lattice = cell.numbers<9>("lattice", c.cell.lattice);
    if (cell.has("qubits")) {
      const json& v = cell.raw("qubits");
      if (!v.is_array() || v.size() != 3) cell.fail("qubits", "expected 3 integers");
      for (int l = 0; l < 3; ++l) {
        if (!v[l].is_number_integer()) cell.fail("qubits", "expected 3 integers");
        c.cell.qubits[l] = v[l].get<int>();
      }
    }
    cell.finish();
  }
  if (r.has("functionals")) {
    Reader f = r.child("functionals");
    c.functionals.kinetic = enum_value(f, "kinetic", c.functionals.kinetic, kKineticNames);
    c.functionals.xc = enum_value(f, "xc", c.functionals.xc, kXcNames);
    c.functionals.lambda = f.number("lambda", c.functionals.lambda);
    f.finish();
  }
  c.electrons = r.number("electrons", c.electrons);
  if (auto p = r.optional_string("initial_density")) c.initial_density = resolve(base, *p);

  if (r.has("external_potential")) {
    Reader e = r.child("external_potential");
    if (e.has("gaussian_wells")) {
      const json& arr = e.raw("gaussian_wells");
      if (!arr.is_array()) e.fail("gaussian_wells", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader w(arr[i], e.qualified("gaussian_wells[" + std::to_string(i) + "]"), source);
        GaussianWell g;
        g.center = read_vec3(w, "center", g.center);
        g.depth = w.number("depth", g.depth);
        g.width = w.number("width", g.width);
        w.finish();
        c.external.wells.push_back(g);
      }
    }
    if (e.has("soft_coulomb")) {
      const json& arr = e.raw("soft_coulomb");
      if (!arr.is_array()) e.fail("soft_coulomb", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader w(arr[i], e.qualified("soft_coulomb[" + std::to_string(i) + "]"), source);
        SoftCoulomb s;
        s.center = read_vec3(w, "center", s.center);
        s.charge = w.number("charge", s.charge);
        s.softening = w.number("softening", s.softening);
        w.finish();
        c.external.ions.push_back(s);
      }
    }
    if (auto t = e.optional_string("table")) c.external.table = resolve(base, *t);
    e.finish();
  }
  if (r.has("scf")) {
    Reader s = r.child("scf");
    c.scf.threshold = s.number("threshold", c.scf.threshold);
    c.scf.max_iterations = static_cast<int>(s.integer("max_iterations", c.scf.max_iterations));
    if (s.has("mixing")) {
      Reader m = s.child("mixing");
      c.scf.mixing.scheme = enum_value(m, "scheme", c.scf.mixing.scheme, kMixingNames);
      c.scf.mixing.alpha = m.number("alpha", c.scf.mixing.alpha);
      c.scf.mixing.history = static_cast<int>(m.integer("history", c.scf.mixing.history));
      m.finish();
    }
    c.scf.energy = enum_value(s, "energy", c.scf.energy, kEnergyNames);
    c.scf.track_infidelity = s.boolean("track_infidelity", c.scf.track_infidelity);
    s.finish();
  }
  if (r.has("pite")) {
    Reader p = r.child("pite");
    c.scf.pite.m0 = p.number("m0", c.scf.pite.m0);
    c.scf.pite.dtau = p.number("dtau", c.scf.pite.dtau);
    c.scf.pite.steps = static_cast<int>(p.integer("steps", c.scf.pite.steps));
    c.scf.pite.mode = enum_value(p, "mode", c.scf.pite.mode, kPiteModeNames);
    p.finish();
  }
  if (r.has("qpe")) {
    Reader q = r.child("qpe");
    QpeConfig& qc = c.qpe.config;
    qc.dt = q.optional_number("dt");
    qc.prior_lower = q.optional_number("prior_lower");
    qc.prior_upper = q.optional_number("prior_upper");
    qc.prior_mean = q.optional_number("prior_mean");
    qc.prior_stddev = q.optional_number("prior_stddev");
    qc.samples = static_cast<int>(q.integer("samples", qc.samples));
    qc.target_stddev = q.number("target_stddev", qc.target_stddev);
    qc.grid_points = static_cast<int>(q.integer("grid_points", qc.grid_points));
    qc.max_k = static_cast<int>(q.integer("max_k", qc.max_k));
    c.qpe.trotter_steps = static_cast<int>(q.integer("trotter_steps", c.qpe.trotter_steps));
    c.qpe.prepare_with_pite = q.boolean("prepare_with_pite", c.qpe.prepare_with_pite);
    q.finish();
  }
  if (r.has("cost")) {
    Reader k = r.child("cost");
    c.cost.min_qubits = static_cast<int>(k.integer("min_qubits", c.cost.min_qubits));
    c.cost.max_qubits = static_cast<int>(k.integer("max_qubits", c.cost.max_qubits));
    c.cost.groups = k.unsigned_integer("groups", c.cost.groups);
    k.finish();
  }
  if (r.has("oracle")) {
    Reader o = r.child("oracle");
    c.oracle_solver = enum_value(o, "solver", c.oracle_solver, kSolverNames);
    o.finish();
  }
  std::optional<std::string> stated_hash = r.optional_string("config_hash");
  r.finish();

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (stated_hash && *stated_hash != config_hash(c)) {
    throw ConfigError(source + ": config_hash: stated " + *stated_hash +
                      " does not match the configuration (" + config_hash(c) + ")");
  }
  return c;
}

template <class F>
void check(const std::string& key, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

const char* to_string(RunMode mode) { return enum_name(mode, kModeNames); }

RunMode parse_run_mode(const std::string& name) {
  for (const auto& [n, v] : kModeNames) {
    if (name == n) return v;
  }
  throw ConfigError("unknown mode '" + name + "'");
}

SimulationCell CellSpec::build() const {
  const auto& a = lattice;
  return SimulationCell({a[0], a[1], a[2]}, {a[3], a[4], a[5]}, {a[6], a[7], a[8]}, qubits);
}

void RunConfig::validate() const {
  check("cell", [&] { (void)cell.build(); });
  check("functionals", [&] { functionals.validate(); });
  if (!(electrons > 0.0) || !std::isfinite(electrons)) {
    throw ConfigError("electrons: must be a positive number");
  }
  check("scf", [&] {
    if (!(scf.threshold > 0.0)) throw ParameterError("threshold must be positive");
    if (scf.max_iterations < 1) throw ParameterError("max_iterations must be positive");
    scf.mixing.validate();
  });
  check("pite", [&] { scf.pite.validate(); });
  check("qpe", [&] {
    qpe.config.validate();
    if (qpe.trotter_steps < 1) throw ParameterError("trotter_steps must be positive");
  });
  if (cost.min_qubits < 1 || cost.max_qubits < cost.min_qubits || cost.max_qubits > 40) {
    throw ConfigError("cost: need 1 <= min_qubits <= max_qubits <= 40");
  }
  for (const GaussianWell& w : external.wells) {
    if (!(w.width > 0.0)) throw ConfigError("external_potential.gaussian_wells: width must be positive");
  }
  for (const SoftCoulomb& s : external.ions) {
    if (!(s.softening > 0.0)) {
      throw ConfigError("external_potential.soft_coulomb: softening must be positive");
    }
  }
  if (initial_density && !fs::exists(*initial_density)) {
    throw ConfigError("initial_density: file not found: " + initial_density->string());
  }
  if (external.table && !fs::exists(*external.table)) {
    throw ConfigError("external_potential.table: file not found: " +
                      external.table->string());
  }
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return effective_config_json(a) == effective_config_json(b);
}

RunConfig parse_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open configuration file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path(),
                           path.string());
}

RunConfig parse_config_text(const std::string& text, const fs::path& base_dir,
                            const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": malformed JSON: " + e.what());
  }
  return from_json(root, base_dir, source);
}

std::string config_hash(const RunConfig& config) {
  return hex64(fnv1a(canonical(config).dump()));
}

std::string effective_config_json(const RunConfig& config) {
  json j = canonical(config);
  j["output_dir"] = config.output_dir ? json(config.output_dir->string()) : json(nullptr);
  j["config_hash"] = config_hash(config);
  return j.dump(2) + "\n";
}

}  // namespace qofdft
