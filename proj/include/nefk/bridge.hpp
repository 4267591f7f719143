#pragma once
#include <string>

#include "nefk/dmft.hpp"
#include "nefk/observables.hpp"
#include "nefk/wigner.hpp"

namespace nefk {

// beta(t) = beta0 exp(-gamma (t - t_ref)) + beta1 exp(-gamma1 (t - t_ref)) fitted on
// [t_start, t_end]; family "exp" has beta1 = 0, family "exp2" has gamma < gamma1.
struct BetaFit {
  double beta0 = 0.0, gamma = 0.0, t_ref = 0.0;
  double beta1 = 0.0, gamma1 = 0.0;
  double t_start = 0.0, t_end = 0.0;
  double rms_rel = 0.0;
  int samples = 0;
  std::string family = "exp";
  double operator()(double t) const;
  std::string describe() const;
};

// family: "exp", "exp2", or "auto" (exp unless its residual exceeds max_rms).
BetaFit fit_beta(const Trajectory& beta_traj, double t_fit_start, double max_rms = 0.05,
                 const std::string& family = "auto");

// Late-time retarded self-energy as a function of t_rel, averaged over Wigner
// slices with t_ave in [t_lo, t_hi] and truncated to the common unmasked extent.
struct SteadySigma {
  double dt = 0.0;
  RVector t_rel;
  CVector values;
  double extent = 0.0;
  double spread = 0.0;
  int slices = 0;
  bool dense = false;  // true when both parities were available (spacing dt)
};

SteadySigma steady_retarded_sigma(const CMatrix& sigma_retarded, double t_min, double dt, double t_on, double t_lo,
                                  double t_hi, const RVector& omega_check, double max_spread = 5e-2);

// One-sided transform of the steady proxy.
CVector steady_spectrum(const SteadySigma& sr, const RVector& omega, const WindowPolicy& window = {});

// Sigma^<(w) = -2i f(w) Im Sigma^R(w).
CVector fdt_lesser_spectrum(const CVector& sr, const RVector& omega, double beta);

// Full two-time tables on the extended real-time grid built from the FDT:
// lesser(i,j) uses beta_fit((t_i + t_j)/2); retarded(i,j) is the steady proxy.
struct ExtensionTable {
  double t_min = 0.0, dt = 0.0;
  int n_t = 0;
  CMatrix lesser, retarded;
  RVector beta_of_s;
};

ExtensionTable extend_sigma_lesser(const SteadySigma& sr, const BetaFit& fit, double t_min, double t_max_new);

// Lesser Sigma(t_rel) from the steady proxy at a single inverse temperature, on t_rel = k dt.
CVector fdt_lesser_time(const SteadySigma& sr, double beta, int n_rel);

struct BlendPolicy {
  double width = 0.0;  // cosine cross-fade below t_patch; 0 = hard patch
};

struct ExtendedSigma {
  ContourKernel kernel;
  double t_patch = 0.0, t_max_new = 0.0;
  double mixed_audit = 0.0;
  double continuity = 0.0;
  BlendPolicy blend;
};

ExtendedSigma assemble_extended(const TransientSolution& sol, const ExtensionTable& ext, double t_patch,
                                double t_max_new, const BlendPolicy& blend = {}, double mixed_threshold = 1e-2);

struct ExtendedObservables {
  LatticeResult lattice;
  Trajectory current;
};

ExtendedObservables extended_observables(const ExtendedSigma& ext, const QuadratureGrid& quad,
                                         const ModelParams& params, int threads = 0);

}  // namespace nefk
