#pragma once
#include <array>
#include <functional>
#include <optional>

#include "nefk/contour.hpp"
#include "nefk/lattice.hpp"
#include "nefk/propagators.hpp"

namespace nefk {

struct ModelParams {
  double U = 0.0;
  double w1 = 0.5;
  double mu = 0.0;  // full chemical potential; mu = U/2 at half filling
  double T = 0.1;
  FieldProtocol fp;

  double mu_lattice() const { return mu - U * w1; }
  bool particle_hole() const { return w1 == 0.5 && mu_lattice() == 0.0; }
  ThermalState lattice_thermal() const { return thermal_state(T, mu_lattice()); }
};

ModelParams half_filling(double U, double T, FieldProtocol fp);

int resolve_threads(int requested);

struct LatticeOptions {
  int threads = 0;
  bool allow_pairing = true;
};

// nodes/weight are the representatives actually solved; paired[k] marks that
// the mirror node (-eps, -eps_bar) was folded in through G_{-k} = -G_k^T.
struct LatticeResult {
  ContourKernel g_loc;
  QuadratureGrid nodes;
  std::vector<char> paired;
  RMatrix density;  // nodes x n_t, n_k(t) = -i G_k^<(t,t)
};

LatticeResult lattice_sum_full(const ContourKernel& sigma, const QuadratureGrid& quad, const FieldProtocol& fp,
                               const ThermalState& ts, const LatticeOptions& opts = {});
ContourKernel lattice_sum(const ContourKernel& sigma, const QuadratureGrid& quad, const FieldProtocol& fp,
                          const ThermalState& ts);

// G_imp = (1-w1) g0 + w1 (g0^-1 - U)^-1, evaluated without inverting g0.
ContourKernel impurity_green(const ContourKernel& g0_eff, double U, double w1);

struct ScfOptions {
  double tol = 1e-6;
  int max_iter = 60;
  double mixing = 1.0;
  bool oscillation_fallback = true;
  int threads = 0;
  std::optional<ContourKernel> initial_sigma;
  // One pass that fills G and the medium from initial_sigma, leaving sigma untouched.
  bool evaluate_only = false;
  std::function<void(int, const ContourKernel&, double)> on_iteration;
};

struct TransientSolution {
  GridPtr grid;
  ModelParams params;
  ContourKernel sigma;   // Hartree-subtracted
  ContourKernel g_loc;
  ContourKernel g_imp;
  ContourKernel g0_eff;  // effective medium in the full-mu frame
  ContourKernel g_hat;   // effective medium in the Hartree-subtracted frame
  int iterations = 0;
  std::vector<double> residual_history;
  double impurity_residual = 0.0;
  double mixing_used = 1.0;
  QuadratureGrid nodes;
  std::vector<char> paired;
  RMatrix density;
};

TransientSolution scf_solve(const ModelParams& params, const GridPtr& grid, const QuadratureGrid& quad,
                            const ScfOptions& opts = {});

// Lambda = (i d_t + mu) delta_c - g0_eff^-1; requires invertible kernels.
ContourKernel hybridization(const TransientSolution& sol);

// Lesser component of A o B assembled from Langreth pieces.
// t_diag / a_diag hold the equal-time values on the forward and backward
// branches (time-ordered and anti-time-ordered); for products they differ
// from the lesser/greater average by the quadrature's equal-time jump.
struct LangrethParts {
  CMatrix lesser, greater, retarded, advanced, mixed_right, mixed_left, matsubara;
  CVector t_diag, a_diag;
};
LangrethParts langreth_parts(const ContourKernel& k);
LangrethParts langreth_product(const LangrethParts& a, const LangrethParts& b, const ContourGrid& g);

// max |G^< - g^< - (g o Sigma o G)^<| with the products built from components.
// continuum_diagonal = true replaces the product diagonals by the lesser/greater
// average, i.e. the plain trapezoid Langreth rules (differs at O(dt^2)).
double langreth_lesser_residual(const ContourKernel& g_medium, const ContourKernel& sigma, const ContourKernel& g,
                                bool continuum_diagonal = false);

struct CommonLattice {
  double step = 0.0;
  int n = 0;
  std::array<int, 3> stride{};
};

CommonLattice common_lattice(const std::array<double, 3>& dts, double t_min, double t_max);
std::array<double, 3> richardson_weights(const std::array<double, 3>& dts);

RVector extrapolate_series(const std::array<RVector, 3>& series, const std::array<double, 3>& dts, double t_min,
                           double t_max);
CMatrix extrapolate_table(const std::array<CMatrix, 3>& tables, const std::array<double, 3>& dts, double t_min,
                          double t_max);

struct ExtrapolatedTables {
  double t_min = 0.0;
  double step = 0.0;
  CMatrix g_lesser, g_retarded, sigma_lesser, sigma_retarded;
};

ExtrapolatedTables extrapolate_dt(const std::array<const TransientSolution*, 3>& runs);

}  // namespace nefk
