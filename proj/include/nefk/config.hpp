#pragma once
#include <array>
#include <string>
#include <vector>

#include "nefk/dmft.hpp"

namespace nefk {

struct RunConfig {
  // model
  double U = 1.5;
  double w1 = 0.5;
  std::string mu_policy = "half_filling";  // or "fixed"
  double mu = 0.75;
  // thermal
  double T = 0.1;
  // field
  double E = 0.5;
  double t_on = 5.0;
  // contour
  double t_min = 0.0;
  double t_max = 20.0;
  std::array<double, 3> dt{0.1, 1.0 / 15.0, 0.05};
  int n_tau = 60;
  // lattice
  int quad_order = 20;
  double quad_prune = 1e-12;
  // scf
  double scf_tol = 1e-6;
  int scf_max_iter = 60;
  double scf_mixing = 1.0;
  // equilibrium
  std::vector<double> eq_U{0.5, 1.0, 1.5, 2.0};
  double eq_omega_max = 6.0;
  int eq_n_omega = 1201;
  // bridge
  double t_fit_start = 8.0;
  double t_patch = 12.0;
  double t_max_new = 60.0;
  double blend_width = 0.0;
  double steady_window = 1.0;
  int bridge_run = 0;  // index into dt of the run that is extended
  std::string fit_family = "auto";
  double mixed_threshold = 1e-2;
  // analysis
  double min_extent = 6.0;  // shortest unmasked |t_rel| window for spectra
  double omega_max = 4.0;
  int n_omega = 161;
  double slice_step = 1.0;  // t_ave spacing of the emitted Wigner slices
  // output
  std::string output_dir = "nefk_out";
  int checkpoint_every = 1;
  int threads = 0;

  double chemical_potential() const;
  ModelParams model() const;
  ModelParams model_at(double U) const;
  void validate() const;
  std::string hash() const;
  // Covers only the inputs of the transient solve; keys checkpoints.
  std::string solver_hash() const;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& c);
// key=value override, key in dotted json form ("field.E") or flat ("E").
void apply_override(RunConfig& c, const std::string& assignment);

}  // namespace nefk
