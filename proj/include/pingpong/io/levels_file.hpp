#pragma once

// Level tables (CSV) and a binary dump of manifolds with their
// eigenvectors, so later stages can skip the eigensolver.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "pingpong/dvr.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/units.hpp"

namespace pingpong::io {

/// Columns e, v, J, energy (hartree and cm^-1), bound.
inline void write_levels_csv(std::ostream& out, const std::vector<Manifold>& manifolds) {
  out << "e,v,J,energy_hartree,energy_cm,bound\n";
  char buf[128];
  for (const auto& m : manifolds) {
    for (const auto& l : m.levels) {
      std::snprintf(buf, sizeof buf, "%s,%d,%d,%.15e,%.9f,%d\n", to_string(m.e).data(), l.label.v, m.J, l.energy,
                    units::to_wavenumbers(l.energy), l.bound ? 1 : 0);
      out << buf;
    }
  }
}

inline void write_levels_csv(const std::filesystem::path& path, const std::vector<Manifold>& manifolds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  write_levels_csv(out, manifolds);
}

namespace detail {

inline constexpr char kLevelsMagic[8] = {'P', 'P', 'L', 'E', 'V', 'E', 'L', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError("truncated levels file");
  return v;
}

}  // namespace detail

/// All manifolds must share one grid.
inline void write_levels_binary(const std::filesystem::path& path, const std::vector<Manifold>& manifolds) {
  if (manifolds.empty()) throw DomainError("nothing to write");
  const auto& g = manifolds.front().grid;
  for (const auto& m : manifolds) {
    if (!(m.grid == g)) throw DomainError("levels file requires a common grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.write(detail::kLevelsMagic, sizeof detail::kLevelsMagic);
  detail::put<double>(out, g.r_min());
  detail::put<double>(out, g.r_max());
  detail::put<std::int32_t>(out, g.size());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(manifolds.size()));
  for (const auto& m : manifolds) {
    detail::put<std::uint8_t>(out, m.e == Electronic::X ? 0 : 1);
    detail::put<std::int32_t>(out, m.J);
    detail::put<double>(out, m.asymptote);
    detail::put<std::int32_t>(out, static_cast<std::int32_t>(m.levels.size()));
    for (const auto& l : m.levels) {
      detail::put<double>(out, l.energy);
      detail::put<std::uint8_t>(out, l.bound ? 1 : 0);
      out.write(reinterpret_cast<const char*>(l.wavefunction.data()),
                static_cast<std::streamsize>(sizeof(double) * l.wavefunction.size()));
    }
  }
}

inline std::vector<Manifold> read_levels_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open levels file '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, detail::kLevelsMagic)) {
    throw ParseError(path.string() + ": not a levels file");
  }
  const double r0 = detail::take<double>(in);
  const double r1 = detail::take<double>(in);
  const auto n = detail::take<std::int32_t>(in);
  const RadialGrid grid(r0, r1, n);
  const auto count = detail::take<std::uint32_t>(in);
  std::vector<Manifold> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto e = detail::take<std::uint8_t>(in) == 0 ? Electronic::X : Electronic::A;
    const auto J = detail::take<std::int32_t>(in);
    Manifold m{e, J, grid, detail::take<double>(in), {}};
    const auto nl = detail::take<std::int32_t>(in);
    if (nl < 0 || J < 0) throw ParseError(path.string() + ": corrupt manifold header");
    for (std::int32_t v = 0; v < nl; ++v) {
      const double energy = detail::take<double>(in);
      const bool bound = detail::take<std::uint8_t>(in) != 0;
      Eigen::VectorXd phi(n);
      in.read(reinterpret_cast<char*>(phi.data()), static_cast<std::streamsize>(sizeof(double) * n));
      if (!in) throw ParseError(path.string() + ": truncated levels file");
      m.levels.push_back({{e, v, J}, energy, bound, grid, std::move(phi)});
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace pingpong::io
