#pragma once
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nefk/bridge.hpp"
#include "nefk/config.hpp"
#include "nefk/equilibrium.hpp"

namespace nefk {

// Thermal calibration of the interacting model at the run's U (beta grid down to the plateau).
CalibrationTable calibrate(const RunConfig& c);

struct EquilibriumArtifacts {
  std::vector<EqSolution> panels;
  std::vector<std::string> files;
};

// One Sigma/DOS panel per U in c.eq_U, plus the calibration table at c.U.
EquilibriumArtifacts cmd_equilibrium(const RunConfig& c, bool write = true);

struct RunReport {
  double dt = 0.0;
  double seconds = 0.0;  // solve time, including work stored in the checkpoint
  double wall = 0.0;     // this invocation
  bool resumed = false;
  std::string error;
};

struct TransientArtifacts {
  std::array<std::shared_ptr<TransientSolution>, 3> runs;
  std::array<RunReport, 3> reports;
  RVector common_t, j_extrap;
  std::array<Trajectory, 3> current;
  Trajectory e_tot, beta_eff;  // from the finest completed run
  double e_eq0 = 0.0;
  std::vector<std::string> files;
};

using ProgressFn = std::function<void(const std::string&)>;

// Solves the three dt runs (checkpointed, resumable), extrapolates and writes CSVs.
TransientArtifacts cmd_transient(const RunConfig& c, bool write = true, const ProgressFn& progress = {});

// Single converged run at dt = c.dt[index], reusing a stored sigma when present.
std::shared_ptr<TransientSolution> solve_run(const RunConfig& c, int index, RunReport* report = nullptr,
                                             const ProgressFn& progress = {});

struct BridgeArtifacts {
  BetaFit fit;
  SteadySigma steady;
  ExtendedSigma extended;
  Trajectory transient_current, extended_current;
  double seconds = 0.0;
  std::vector<std::string> files;
};

BridgeArtifacts cmd_bridge(const RunConfig& c, const TransientSolution& base, const CalibrationTable& table,
                           bool write = true, const ProgressFn& progress = {});

// Fourier-resolved Wigner slice of Sigma with its FDT prediction.
struct SpectralSlice {
  double t_ave = 0.0, extent = 0.0, beta = 0.0;
  RVector t_rel;  // unmasked samples, t_rel >= 0
  CVector sr_time, sl_time;
  RVector omega;
  CVector sr, sl, sl_fdt;
};

// Slices with an unmasked window of at least c.min_extent, every c.slice_step in t_ave.
std::vector<SpectralSlice> spectral_slices(const TransientSolution& sol, const RunConfig& c,
                                           const std::function<double(double)>& beta_at);

// Beta_eff trajectory of a solved run.
Trajectory beta_trajectory(const TransientSolution& sol, const CalibrationTable& table, double e_eq0);

std::string run_tag(const RunConfig& c, int index);

}  // namespace nefk
