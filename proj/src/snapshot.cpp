#include "kawalab/snapshot.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace kawalab {

namespace {

const char kMagic[4] = {'K', 'W', 'S', 'P'};

void write_exact(std::ofstream& out, const void* p, std::size_t len,
                 const std::string& path) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  if (!out) throw ConfigError("snapshot write failed: " + path);
}

void read_exact(std::ifstream& in, void* p, std::size_t len,
                const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw ConfigError("snapshot truncated: " + path);
}

std::string snap_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.kwsp", index);
  return buf;
}

}  // namespace

void save_snapshot(const std::string& path, const SpectralField& field,
                   double time) {
  if (field.coeff.size() != field.grid.n)
    throw ConfigError("save_snapshot: malformed field");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("save_snapshot: cannot open " + path);
  write_exact(out, kMagic, 4, path);
  std::uint32_t version = kSnapshotVersion;
  write_exact(out, &version, sizeof version, path);
  std::uint64_t n = field.grid.n;
  write_exact(out, &n, sizeof n, path);
  write_exact(out, &field.grid.box_length, sizeof(double), path);
  write_exact(out, &time, sizeof(double), path);
  for (const cd& c : field.coeff) {
    double re = c.real(), im = c.imag();
    write_exact(out, &re, sizeof re, path);
    write_exact(out, &im, sizeof im, path);
  }
}

SpectralField load_snapshot(const std::string& path, double* time) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_snapshot: cannot open " + path);
  char magic[4];
  read_exact(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("load_snapshot: bad magic in " + path);
  std::uint32_t version = 0;
  read_exact(in, &version, sizeof version, path);
  if (version != kSnapshotVersion)
    throw ConfigError("load_snapshot: unsupported format version " +
                      std::to_string(version) + " in " + path);
  std::uint64_t n = 0;
  read_exact(in, &n, sizeof n, path);
  SpectralField f;
  read_exact(in, &f.grid.box_length, sizeof(double), path);
  double t = 0;
  read_exact(in, &t, sizeof t, path);
  if (time) *time = t;
  f.grid.n = static_cast<std::size_t>(n);
  f.coeff.resize(f.grid.n);
  for (auto& c : f.coeff) {
    double re = 0, im = 0;
    read_exact(in, &re, sizeof re, path);
    read_exact(in, &im, sizeof im, path);
    c = cd{re, im};
  }
  return f;
}

void save_trajectory(const std::string& dir, const Trajectory& traj) {
  if (traj.states.size() != traj.times.size())
    throw ConfigError("save_trajectory: malformed trajectory");
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["params"] = {
      {"kind", traj.params.kind == EquationKind::Kawahara ? "kawahara"
                                                          : "modified"},
      {"alpha", traj.params.alpha},
      {"beta", traj.params.beta}};
  manifest["dt"] = traj.dt;
  manifest["times"] = traj.times;
  nlohmann::json inv_log = nlohmann::json::array();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::string name = snap_name(i);
    save_snapshot(dir + "/" + name, traj.states[i], traj.times[i]);
    names.push_back(name);
    Invariants inv = invariants(traj.states[i], traj.params);
    inv_log.push_back({{"mass", inv.mass},
                       {"l2", inv.l2},
                       {"hamiltonian", inv.hamiltonian}});
  }
  manifest["snapshots"] = names;
  manifest["invariants"] = inv_log;
  std::ofstream out(dir + "/manifest.json", std::ios::trunc);
  if (!out) throw ConfigError("save_trajectory: cannot write manifest");
  out << manifest.dump(2) << "\n";
}

Trajectory load_trajectory(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw ConfigError("load_trajectory: missing manifest in " + dir);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw ConfigError("load_trajectory: bad manifest: " +
                      std::string(e.what()));
  }
  Trajectory traj;
  std::string kind = manifest.at("params").at("kind").get<std::string>();
  traj.params.kind = kind == "kawahara" ? EquationKind::Kawahara
                                        : EquationKind::ModifiedKawahara;
  traj.params.alpha = manifest.at("params").at("alpha").get<double>();
  traj.params.beta = manifest.at("params").at("beta").get<double>();
  traj.dt = manifest.at("dt").get<double>();
  traj.times = manifest.at("times").get<std::vector<double>>();
  for (const auto& name : manifest.at("snapshots")) {
    traj.states.push_back(
        load_snapshot(dir + "/" + name.get<std::string>()));
  }
  if (traj.states.size() != traj.times.size())
    throw ConfigError("load_trajectory: manifest/snapshot count mismatch");
  return traj;
}

}  // namespace kawalab
