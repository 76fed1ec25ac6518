#pragma once

#include <string>

#include "kawalab/propagator.hpp"

namespace kawalab {

// Binary snapshot: "KWSP", format version (u32), n (u64), box_length (f64),
// time (f64), then n interleaved (re, im) f64 pairs, all little endian.
inline constexpr std::uint32_t kSnapshotVersion = 1;

void save_snapshot(const std::string& path, const SpectralField& field,
                   double time = 0.0);

// Throws ConfigError on missing file, bad magic, unsupported version, or
// truncated payload. The snapshot time is returned through `time` when given.
SpectralField load_snapshot(const std::string& path, double* time = nullptr);

// Directory of numbered snapshots plus manifest.json carrying the equation
// parameters, the step, the sample times, and the invariant log.
void save_trajectory(const std::string& dir, const Trajectory& traj);
Trajectory load_trajectory(const std::string& dir);

}  // namespace kawalab
