#include "nefk/observables.hpp"

#include <cmath>

namespace nefk {

namespace {
RVector time_axis(const ContourGrid& g) {
  RVector t(g.n_t);
  for (int i = 0; i < g.n_t; ++i) t[i] = g.time(i);
  return t;
}

Trajectory weighted_sum(const QuadratureGrid& nodes, const std::vector<char>& paired, const RMatrix& density,
                        const ContourGrid& g, const FieldProtocol& fp, bool velocity) {
  Trajectory out;
  out.times = time_axis(g);
  out.values = RVector::Zero(g.n_t);
  for (std::size_t r = 0; r < nodes.size(); ++r)
    for (int i = 0; i < g.n_t; ++i) {
      const double t = g.time(i);
      const double c = velocity ? band_velocity(nodes.eps[r], nodes.epsb[r], t, fp)
                                : instantaneous_dispersion(nodes.eps[r], nodes.epsb[r], t, fp);
      const double n = density(r, i);
      out.values[i] += nodes.weight[r] * c * (paired[r] ? 2.0 * n - 1.0 : n);
    }
  return out;
}
}  // namespace

Trajectory current(const QuadratureGrid& nodes, const std::vector<char>& paired, const RMatrix& density,
                   const ContourGrid& grid, const FieldProtocol& fp) {
  Trajectory j = weighted_sum(nodes, paired, density, grid, fp, true);
  j.provenance = "current per direction per site";
  return j;
}

Trajectory current(const TransientSolution& sol) {
  return current(sol.nodes, sol.paired, sol.density, *sol.grid, sol.params.fp);
}

Trajectory kinetic_energy(const QuadratureGrid& nodes, const std::vector<char>& paired, const RMatrix& density,
                          const ContourGrid& grid, const FieldProtocol& fp) {
  Trajectory e = weighted_sum(nodes, paired, density, grid, fp, false);
  e.provenance = "kinetic energy per site";
  return e;
}

Trajectory total_energy(const Trajectory& j, const FieldProtocol& fp, double e_eq0) {
  const int n = static_cast<int>(j.times.size());
  if (n < 2) throw ConfigError("total_energy: current trajectory too short");
  for (int i = 1; i < n; ++i)
    if (!(j.times[i] > j.times[i - 1])) throw ConfigError("total_energy: times must increase");
  const double h = j.times[1] - j.times[0];
  for (int i = 2; i < n; ++i)
    if (std::abs(j.times[i] - j.times[i - 1] - h) > 1e-9 * std::max(1.0, h))
      throw ConfigError("total_energy: gap in current coverage");
  if (fp.E != 0.0 && fp.t_on < j.times[0] - 1e-12) throw ConfigError("total_energy: current does not cover t_on");
  Trajectory e;
  e.times = j.times;
  e.values.resize(n);
  e.provenance = "total energy per site";
  double acc = 0.0;
  e.values[0] = e_eq0;
  for (int i = 1; i < n; ++i) {
    const double a = std::max(j.times[i - 1], fp.t_on), b = j.times[i];
    if (b > a) {
      // j is zero before t_on, so the partial first interval only uses the interpolated edge.
      const double frac = (b - a) / (b - j.times[i - 1]);
      const double ja = j.values[i - 1] + (1.0 - frac) * (j.values[i] - j.values[i - 1]);
      acc += 0.5 * (b - a) * fp.E * (ja + j.values[i]);
    }
    e.values[i] = e_eq0 + acc;
  }
  return e;
}

Trajectory effective_beta(const Trajectory& e_tot, const CalibrationTable& table) {
  Trajectory b;
  b.times = e_tot.times;
  b.values.resize(e_tot.values.size());
  b.provenance = "effective inverse temperature";
  for (int i = 0; i < e_tot.values.size(); ++i) b.values[i] = temperature_from_energy(table, e_tot.values[i]).beta;
  return b;
}

Trajectory local_density(const TransientSolution& sol) {
  const ComponentSet c = extract_components(sol.g_loc);
  Trajectory n;
  n.times = time_axis(*sol.grid);
  n.values.resize(sol.grid->n_t);
  n.provenance = "local density";
  for (int i = 0; i < sol.grid->n_t; ++i) n.values[i] = (-I_unit * c.lesser(i, i)).real();
  return n;
}

}  // namespace nefk
