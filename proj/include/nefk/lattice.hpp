#pragma once
#include <vector>

namespace nefk {

// Joint Gauss-Hermite rule for rho(e) rho(eb), rho(x) = exp(-x^2)/sqrt(pi).
struct QuadratureGrid {
  std::vector<double> eps, epsb, weight;
  int order = 0;
  std::size_t size() const { return weight.size(); }
};

// Step turn-on at t_on with vector potential A(t) = -E (t - t_on) afterwards.
struct FieldProtocol {
  double E = 0.0;
  double t_on = 0.0;
  double vector_potential(double t) const { return t > t_on ? -E * (t - t_on) : 0.0; }
  bool active_within(double t_max) const { return E != 0.0 && t_on < t_max; }
};

QuadratureGrid gauss_hermite_joint(int order, double prune = 0.0);

// Merges nodes sharing eps; exact whenever G0_k cannot depend on eps_bar.
QuadratureGrid merge_by_energy(const QuadratureGrid& q);

double instantaneous_dispersion(double eps, double epsb, double t, const FieldProtocol& fp);

// Antiderivative of instantaneous_dispersion, zero at t_on.
double dispersion_antiderivative(double eps, double epsb, double t, const FieldProtocol& fp);

double phase_integral(double eps, double epsb, double t, double tp, const FieldProtocol& fp);

// d(instantaneous_dispersion)/dt divided by E: the band velocity along the field.
double band_velocity(double eps, double epsb, double t, const FieldProtocol& fp);

}  // namespace nefk
