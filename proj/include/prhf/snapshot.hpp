// Binary snapshots of a SimState.
//
// Little-endian layout, 88-byte header followed by the orbitals:
//   char[8]  magic "PRHF1" (zero padded)
//   u32      format version
//   u32      model (0 hartree, 1 hartree_fock)
//   u64      n
//   f64      L
//   u64      N
//   f64      m
//   f64      kappa
//   f64      t
//   i64      step index
//   f64      dt of the run that wrote it (0 if none)
//   f64      sigma reference of that run (0 if none)
// then N * n^3 pairs (re, im) of f64, x fastest.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "prhf/state.hpp"

namespace prhf {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 88;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotMeta {
  double dt = 0.0;
  double sigma_reference = 0.0;
};

struct LoadedSnapshot {
  SimState state;
  SnapshotMeta meta;
};

void save_snapshot(const std::string& path, const SimState& s, const SnapshotMeta& meta = {});
LoadedSnapshot load_snapshot(const std::string& path);

}  // namespace prhf
