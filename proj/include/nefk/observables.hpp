#pragma once
#include <string>

#include "nefk/dmft.hpp"
#include "nefk/equilibrium.hpp"

namespace nefk {

struct Trajectory {
  RVector times;
  RVector values;
  std::string provenance;
};

// Current per direction per site from momentum-resolved equal-time densities.
Trajectory current(const QuadratureGrid& nodes, const std::vector<char>& paired, const RMatrix& density,
                   const ContourGrid& grid, const FieldProtocol& fp);
Trajectory current(const TransientSolution& sol);

// Kinetic energy sum_k eps_k(t) n_k(t) on the same representation.
Trajectory kinetic_energy(const QuadratureGrid& nodes, const std::vector<char>& paired, const RMatrix& density,
                          const ContourGrid& grid, const FieldProtocol& fp);

// E_eq0 + integral_{t_on}^{t} E j dt (trapezoid on the trajectory grid).
Trajectory total_energy(const Trajectory& j, const FieldProtocol& fp, double e_eq0);

Trajectory effective_beta(const Trajectory& e_tot, const CalibrationTable& table);

Trajectory local_density(const TransientSolution& sol);

}  // namespace nefk
