#include "pulsefront/fieldio.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "pulsefront/error.hpp"

namespace pulsefront {

namespace {

void put_u(std::string& buf, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u(buf, bits, 8);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  std::uint64_t u(int bytes) {
    require(pos + bytes <= buf.size(), ErrorCode::io, "truncated field dump");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += bytes;
    return v;
  }
  double f() {
    const std::uint64_t bits = u(8);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }
};

std::string fmt17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
  const Grid& g = *f.grid;
  std::string buf(kFieldMagic, 4);
  put_u(buf, kFieldVersion, 4);
  put_u(buf, static_cast<std::uint64_t>(g.dim()), 4);
  put_u(buf, static_cast<std::uint64_t>(g.kind()), 4);
  put_u(buf, static_cast<std::uint64_t>(g.policy()), 4);
  for (const auto& a : g.axes()) put_u(buf, static_cast<std::uint64_t>(a.count), 8);
  for (const auto& a : g.axes()) {
    put_f(buf, a.lo);
    put_f(buf, a.hi());
  }
  for (const auto& a : g.axes()) buf.push_back(a.periodic ? 1 : 0);
  put_f(buf, f.time);
  buf.reserve(buf.size() + 8 * f.size());
  for (double v : f.values) put_f(buf, v);
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  require(static_cast<bool>(os), ErrorCode::io, "write failed for " + path);
}

Field read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path);
  const std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  require(buf.size() >= 4 && std::memcmp(buf.data(), kFieldMagic, 4) == 0, ErrorCode::io, path + " is not a field dump");
  Reader r{buf, 4};
  const auto version = r.u(4);
  require(version == kFieldVersion, ErrorCode::io, "unsupported field dump version");
  const int dim = static_cast<int>(r.u(4));
  require(dim >= 1 && dim <= 8, ErrorCode::io, "bad dimension in field dump");
  const auto kind = static_cast<GridKind>(r.u(4));
  const auto policy = static_cast<BoundaryPolicy>(r.u(4));
  std::vector<int> counts(dim);
  for (auto& c : counts) c = static_cast<int>(r.u(8));
  std::vector<double> lo(dim), hi(dim);
  for (int k = 0; k < dim; ++k) {
    lo[k] = r.f();
    hi[k] = r.f();
  }
  std::vector<Axis> axes(dim);
  for (int k = 0; k < dim; ++k) {
    const bool per = r.u(1) != 0;
    const double span = hi[k] - lo[k];
    double h = 1.0;
    if (per) h = span / counts[k];
    else if (counts[k] > 1) h = span / (counts[k] - 1);
    axes[k] = {lo[k], h, counts[k], per};
  }
  const double t = r.f();
  auto grid = std::make_shared<Grid>(kind, std::move(axes), policy);
  std::vector<double> v(grid->size());
  for (auto& x : v) x = r.f();
  require(r.pos == buf.size(), ErrorCode::io, "trailing bytes in field dump");
  return Field(grid, std::move(v), t);
}

void write_csv_slice(const std::string& path, const Field& f, int axis, const std::vector<int>& fixed) {
  const Grid& g = *f.grid;
  require(axis >= 0 && axis < g.dim(), ErrorCode::invalid_argument, "slice axis out of range");
  require(static_cast<int>(fixed.size()) == g.dim(), ErrorCode::invalid_argument, "slice needs one index per axis");
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path);
  os << "x" << axis << ",value\n";
  std::vector<int> m = fixed;
  for (int k = 0; k < g.dim(); ++k)
    require(k == axis || (m[k] >= 0 && m[k] < g.axis(k).count), ErrorCode::out_of_range, "slice index out of range");
  for (int i = 0; i < g.axis(axis).count; ++i) {
    m[axis] = i;
    os << fmt17(g.axis(axis).coord(i)) << ',' << fmt17(f.values[g.index(m)]) << '\n';
  }
}

void write_csv_all(const std::string& path, const Field& f) {
  const Grid& g = *f.grid;
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path);
  for (int k = 0; k < g.dim(); ++k) os << 'x' << k << ',';
  os << "value\n";
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, x);
    for (double c : x) os << fmt17(c) << ',';
    os << fmt17(f.values[i]) << '\n';
  }
}

void write_field_with_sidecar(const std::string& path, const Field& f, const std::string& extra) {
  write_field(path, f);
  nlohmann::json j;
  if (!extra.empty()) {
    try {
      j = nlohmann::json::parse(extra);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::invalid_argument, std::string("sidecar metadata is not JSON: ") + e.what());
    }
    require(j.is_object(), ErrorCode::invalid_argument, "sidecar metadata must be a JSON object");
  }
  const Grid& g = *f.grid;
  j["format"] = "PFLD";
  j["version"] = kFieldVersion;
  j["byte_order"] = "little";
  j["grid"] = g.describe();
  j["grid_kind"] = to_string(g.kind());
  j["boundary_policy"] = to_string(g.policy());
  j["time"] = f.time;
  j["order"] = "row-major, last axis fastest";
  auto axes = nlohmann::json::array();
  for (const Axis& a : g.axes())
    axes.push_back({{"lo", a.lo}, {"hi", a.hi()}, {"spacing", a.spacing}, {"count", a.count}, {"periodic", a.periodic}});
  j["axes"] = axes;
  if (!f.values.empty()) {
    const auto [mn, mx] = std::minmax_element(f.values.begin(), f.values.end());
    j["value_min"] = *mn;
    j["value_max"] = *mx;
  }
  std::ofstream out(path + ".json");
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path + ".json");
  out << j.dump(2) << "\n";
}

}  // namespace pulsefront
