#pragma once
#include <complex>
#include <vector>

#include "nefk/contour.hpp"

namespace nefk {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
cplx faddeeva(cplx z);

// Integral of rho(e)/(z - e) over the Gaussian density; scale = t* (0 gives 1/z).
cplx hilbert_gaussian(cplx z, double scale = 1.0);

struct EqParams {
  double U = 0.0;
  double T = 0.1;
  double mu = 0.0;  // full chemical potential (U/2 at half filling)
  double w1 = 0.5;
  double hopping = 1.0;
  double mu_lattice() const { return mu - U * w1; }
};

// Uniform grid on [lo, hi] with n cells, sampled at cell centres.
RVector omega_grid(double lo, double hi, int n);

struct EqSolution {
  RVector omega;
  CVector sigma_r;  // Hartree-subtracted
  CVector g_r;
  RVector dos;
  EqParams params;
  double eta = 1e-6;
};

// Retarded self-energy and local Green's function at one complex frequency.
struct EqPoint {
  cplx sigma, g;
  int iterations = 0;
};
EqPoint eq_solve_point(cplx z, const EqParams& p, cplx sigma_guess, double tol = 1e-13);

EqSolution eq_scf(const EqParams& p, const RVector& omega, double tol = 1e-12, double eta = 1e-6);

// Pointwise (1 - w1) G0 + w1/(G0^-1 - U); poles flags points where the shifted
// inverse vanishes within 1e-12.
struct DressedSpectrum {
  CVector g;
  std::vector<int> poles;
};
DressedSpectrum fk_dress_steady(const CVector& g0, double w1, double U);

// Total energy per site, integral of w f_T(w) A(w) dw in the Hartree-subtracted frame.
double equilibrium_energy(const EqParams& p, double T);

struct CalibrationTable {
  std::vector<double> T, beta, energy;  // beta ascending, beta[0] = 0 (T = infinity)
  double plateau = 0.0;
  double energy_at(double beta) const;
};

CalibrationTable energy_vs_temperature(const EqParams& p, std::vector<double> T_list);

struct TemperatureEstimate {
  double T = 0.0;
  double beta = 0.0;
  bool saturated = false;
};
TemperatureEstimate temperature_from_energy(const CalibrationTable& table, double energy);

}  // namespace nefk
