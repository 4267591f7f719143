#pragma once
#include "nefk/contour.hpp"
#include "nefk/lattice.hpp"

namespace nefk {

struct ThermalState {
  double T = 0.1;
  double beta = 10.0;
  double mu = 0.0;
};

ThermalState thermal_state(double T, double mu);

double fermi(double omega, double T);
// beta = 0 is allowed and gives 1/2.
double fermi_beta(double x, double beta);
cplx fermi_beta(cplx z, double beta);

// Noninteracting driven propagator of the band pair (eps, eps_bar) on the full
// contour; the level energy is eps - ts.mu. The grid's beta is the one used.
ContourKernel bare_gk_contour(double eps, double epsb, const GridPtr& grid, const FieldProtocol& fp,
                              const ThermalState& ts);

// Isolated level of energy shift - mu, field free.
ContourKernel bare_isolated_level(const GridPtr& grid, double mu, double shift);

ContourKernel bare_local(const GridPtr& grid, const QuadratureGrid& quad, const FieldProtocol& fp,
                         const ThermalState& ts);

// Writes the bare propagator into an existing matrix (hot path of the lattice sum).
// On the real branches the bare propagator is e_i c(i,j) conj(e_j) with c
// taking three values (later, equal, earlier); BareFactors records them.
struct BareFactors {
  CVector e;
  cplx later, earlier, diag;
};

void fill_bare_gk(CMatrix& out, double eps, double epsb, const ContourGrid& grid, const FieldProtocol& fp,
                  double mu, BareFactors* factors = nullptr);

// out = g0 * s using the separable real-branch structure of g0 (O(n^2) there).
void bare_left_multiply(CMatrix& out, const CMatrix& g0, const BareFactors& f, const ContourGrid& grid,
                        const CMatrix& s);

}  // namespace nefk
