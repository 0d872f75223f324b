#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "qofdft/errors.hpp"
#include "qofdft/hash.hpp"
#include "qofdft/ofham.hpp"

namespace qofdft {

void write_grid_file(const std::filesystem::path& path,
                     const SimulationCell& cell,
                     std::span<const double> values) {
  if (values.size() != cell.num_points()) {
    throw LayoutError("grid file values do not match the cell grid");
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "qofdft-grid 1\n";
  os << "dims " << cell.points(0) << ' ' << cell.points(1) << ' '
     << cell.points(2) << '\n';
  os << "cell " << hex64(cell.fingerprint()) << '\n';
  char buf[40];
  for (double x : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    os << buf;
  }
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<double> read_grid_file(const std::filesystem::path& path,
                                   const SimulationCell& cell) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open grid file " + path.string());
  const std::string where = path.string() + ": ";

  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "qofdft-grid" || version != 1) {
    throw IoError(where + "missing 'qofdft-grid 1' header");
  }
  std::string key;
  int n1 = 0, n2 = 0, n3 = 0;
  if (!(is >> key >> n1 >> n2 >> n3) || key != "dims") {
    throw IoError(where + "missing dims line");
  }
  if (n1 != cell.points(0) || n2 != cell.points(1) || n3 != cell.points(2)) {
    std::ostringstream msg;
    msg << where << "grid " << n1 << 'x' << n2 << 'x' << n3
        << " does not match cell grid " << cell.points(0) << 'x'
        << cell.points(1) << 'x' << cell.points(2);
    throw LayoutError(msg.str());
  }
  std::string fingerprint;
  if (!(is >> key >> fingerprint) || key != "cell") {
    throw IoError(where + "missing cell line");
  }
  if (fingerprint != hex64(cell.fingerprint())) {
    throw LayoutError(where + "cell fingerprint " + fingerprint +
                      " does not match " + hex64(cell.fingerprint()));
  }
  std::vector<double> values(cell.num_points());
  std::string token;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(is >> token)) {
      throw IoError(where + "expected " + std::to_string(values.size()) +
                    " values, found " + std::to_string(i));
    }
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, values[i]);
    if (ec != std::errc() || ptr != end) {
      throw IoError(where + "bad value '" + token + "'");
    }
    if (!std::isfinite(values[i])) {
      throw DomainError(where + "non-finite value at index " + std::to_string(i));
    }
  }
  if (is >> token) throw IoError(where + "trailing data after grid values");
  return values;
}

}  // namespace qofdft
