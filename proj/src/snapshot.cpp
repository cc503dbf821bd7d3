#include "prhf/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace prhf {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'H', 'F', '1', 0, 0, 0};

template <class T>
void put(std::vector<unsigned char>& buf, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <class T>
T get(const unsigned char*& p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= U(p[i]) << (8 * i);
  p += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

void save_snapshot(const std::string& path, const SimState& s, const SnapshotMeta& meta) {
  s.psi.validate();
  const Grid& g = s.psi.grid();
  std::vector<unsigned char> buf(kMagic, kMagic + 8);
  buf.reserve(kSnapshotHeaderBytes + s.psi.count() * g.size() * 16);
  put<std::uint32_t>(buf, kSnapshotVersion);
  put<std::uint32_t>(buf, s.model == Model::Hartree ? 0u : 1u);
  put<std::uint64_t>(buf, std::uint64_t(g.n()));
  put<double>(buf, g.length());
  put<std::uint64_t>(buf, s.psi.count());
  put<double>(buf, s.psi.mass);
  put<double>(buf, s.psi.kappa);
  put<double>(buf, s.t);
  put<std::int64_t>(buf, s.step_index);
  put<double>(buf, meta.dt);
  put<double>(buf, meta.sigma_reference);
  for (const auto& f : s.psi.orbitals)
    for (const auto& z : f.values) {
      put<double>(buf, z.real());
      put<double>(buf, z.imag());
    }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open snapshot for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw SnapshotError("failed writing snapshot: " + path);
}

LoadedSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open snapshot: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kSnapshotHeaderBytes) throw SnapshotError("snapshot truncated (header): " + path);
  if (std::memcmp(buf.data(), kMagic, 8) != 0) throw SnapshotError("not a snapshot file (bad magic): " + path);

  const unsigned char* p = buf.data() + 8;
  const auto version = get<std::uint32_t>(p);
  if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  const auto model = get<std::uint32_t>(p);
  if (model > 1) throw SnapshotError("snapshot: invalid model tag");
  const auto n = get<std::uint64_t>(p);
  const double L = get<double>(p);
  const auto count = get<std::uint64_t>(p);
  const double m = get<double>(p);
  const double kappa = get<double>(p);
  const double t = get<double>(p);
  const auto step = get<std::int64_t>(p);
  LoadedSnapshot out;
  out.meta.dt = get<double>(p);
  out.meta.sigma_reference = get<double>(p);

  if (n > std::uint64_t(kMaxGridPoints) || count == 0 || count > 100000)
    throw SnapshotError("snapshot: implausible header (n or N)");
  Grid g;
  try {
    g = make_grid(int(n), L);
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: bad grid in header: ") + e.what());
  }
  const std::size_t expected = kSnapshotHeaderBytes + count * g.size() * 16;
  if (buf.size() != expected)
    throw SnapshotError("snapshot size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                        std::to_string(buf.size()));

  std::vector<ComplexField> orbs;
  orbs.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    ComplexField f(g);
    for (auto& z : f.values) {
      const double re = get<double>(p);
      const double im = get<double>(p);
      z = cplx(re, im);
    }
    orbs.push_back(std::move(f));
  }
  try {
    out.state.psi = OrbitalSet(std::move(orbs), m, kappa);
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: invalid physics in header: ") + e.what());
  }
  out.state.t = t;
  out.state.step_index = step;
  out.state.model = model == 0 ? Model::Hartree : Model::HartreeFock;
  return out;
}

}  // namespace prhf
