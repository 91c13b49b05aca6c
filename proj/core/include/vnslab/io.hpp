#pragma once

#include <string>
#include <vector>

#include "vnslab/config.hpp"

namespace vnslab::io {

using coupling::SimState;
using diag::DiagnosticsRecord;
using kinetic::ParticleEnsemble;
using spectral::FourierField;
using spectral::GridField;

/// --- binary formats (versioned, endian-tagged) -------------------------

void save_field(const FourierField& f, const std::string& path);
FourierField load_field(const std::string& path);

void save_grid(const GridField& g, const std::string& path);
GridField load_grid(const std::string& path);

void save_ensemble(const ParticleEnsemble& p, const std::string& path);
ParticleEnsemble load_ensemble(const std::string& path);

/// Checkpoints embed the effective config so a run can be resumed from the
/// file alone. Round-trips bit exactly.
void save_checkpoint(const SimState& s, const RunConfig& cfg, const std::string& path);
std::pair<SimState, RunConfig> load_checkpoint(const std::string& path);

/// --- CSV ----------------------------------------------------------------

void write_series_csv(const std::vector<DiagnosticsRecord>& records,
                      const std::string& path);

struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
  std::vector<double> col(const std::string& name) const;
};
Series read_series_csv(const std::string& path);

/// Physical-space sample export for plotting (x, y[, z], components...).
void write_grid_csv(const GridField& g, const std::string& path);
/// Subsampled particle export (x, v, w rows).
void write_particles_csv(const ParticleEnsemble& p, std::size_t max_rows,
                         const std::string& path);

/// --- run orchestration ----------------------------------------------------

struct SnapshotEntry {
  std::int64_t step = 0;
  double t = 0.0;
  std::string u_file;
  std::string rho_file;
};

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  std::vector<SnapshotEntry> snapshots;
  std::string out_dir;
};

/// Build the initial SimState from a config (deterministic in seed).
SimState make_initial_state(const RunConfig& cfg);

/// Advance to t_final, emitting records/snapshots/checkpoints under out_dir
/// (empty out_dir -> no files written). progress != nullptr receives each
/// emitted record.
RunResult run_simulation(const RunConfig& cfg, SimState state, const std::string& out_dir,
                         std::vector<DiagnosticsRecord>* progress = nullptr);

inline RunResult run_simulation(const RunConfig& cfg, const std::string& out_dir) {
  return run_simulation(cfg, make_initial_state(cfg), out_dir);
}

std::vector<SnapshotEntry> read_snapshot_index(const std::string& run_dir);

}  // namespace vnslab::io
