#include "nefk/propagators.hpp"

#include <cmath>

namespace nefk {

namespace {
double softplus(double y) { return std::max(y, 0.0) + std::log1p(std::exp(-std::abs(y))); }
}  // namespace

ThermalState thermal_state(double T, double mu) {
  if (!(T > 0)) throw ConfigError("thermal state: temperature must be positive");
  return ThermalState{T, 1.0 / T, mu};
}

double fermi_beta(double x, double beta) {
  const double y = beta * x;
  if (y > 0) {
    const double e = std::exp(-y);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(y));
}

cplx fermi_beta(cplx z, double beta) {
  const cplx y = beta * z;
  if (y.real() > 0) {
    const cplx e = std::exp(-y);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(y));
}

double fermi(double omega, double T) {
  if (!(T > 0)) throw ConfigError("fermi: temperature must be positive");
  return fermi_beta(omega, 1.0 / T);
}

void fill_bare_gk(CMatrix& out, double eps, double epsb, const ContourGrid& g, const FieldProtocol& fp, double mu,
                  BareFactors* factors) {
  const int n = g.size();
  const double x = eps - mu;
  const double beta = g.beta;
  const double f = fermi_beta(x, beta);
  const double sp_plus = softplus(-beta * x);   // -log(1 - f)
  const double sp_minus = softplus(beta * x);   // -log(f)
  const double a0 = dispersion_antiderivative(eps, epsb, g.t_min, fp);
  CVector e(n);
  std::vector<double> tau(n);
  for (int z = 0; z < n; ++z) {
    const ContourPoint& p = g.points[z];
    double ph = 0.0;
    if (p.branch != Branch::spur) ph = dispersion_antiderivative(eps, epsb, p.t, fp) - a0 - mu * (p.t - g.t_min);
    e[z] = cplx(std::cos(ph), -std::sin(ph));
    tau[z] = p.tau;
  }
  out.resize(n, n);
  const int nr = 2 * g.n_t;
  const cplx later = -I_unit * (1.0 - f), earlier = I_unit * f, diag = -I_unit * (0.5 - f);
  for (int j = 0; j < nr; ++j) {
    const cplx ej = std::conj(e[j]);
    for (int i = 0; i < nr; ++i) out(i, j) = (i > j ? later : (i < j ? earlier : diag)) * e[i] * ej;
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i < nr && j < nr) continue;
      const double d = tau[i] - tau[j];
      cplx c;
      if (i > j)
        c = -I_unit * std::exp(-x * d - sp_plus);
      else if (i < j)
        c = I_unit * std::exp(-x * d - sp_minus);
      else
        c = diag;
      out(i, j) = c * e[i] * std::conj(e[j]);
    }
  if (factors) *factors = BareFactors{e.head(nr), later, earlier, diag};
}

void bare_left_multiply(CMatrix& out, const CMatrix& g0, const BareFactors& f, const ContourGrid& g,
                        const CMatrix& s) {
  const int n = g.size(), nr = 2 * g.n_t, nm = n - nr;
  out.resize(n, s.cols());
  for (int c = 0; c < s.cols(); ++c) {
    cplx tot = 0.0;
    for (int i = 0; i < nr; ++i) tot += std::conj(f.e[i]) * s(i, c);
    cplx run = 0.0;
    for (int i = 0; i < nr; ++i) {
      const cplx y = std::conj(f.e[i]) * s(i, c);
      out(i, c) = f.e[i] * (f.later * run + f.diag * y + f.earlier * (tot - run - y));
      run += y;
    }
  }
  out.topRows(nr).noalias() += g0.topRightCorner(nr, nm) * s.bottomRows(nm);
  out.bottomRows(nm).noalias() = g0.bottomRows(nm) * s;
}

ContourKernel bare_gk_contour(double eps, double epsb, const GridPtr& grid, const FieldProtocol& fp,
                              const ThermalState& ts) {
  CMatrix m;
  fill_bare_gk(m, eps, epsb, *grid, fp, ts.mu);
  return ContourKernel(grid, std::move(m));
}

ContourKernel bare_isolated_level(const GridPtr& grid, double mu, double shift) {
  return bare_gk_contour(shift, 0.0, grid, FieldProtocol{0.0, grid->t_min}, ThermalState{1.0 / grid->beta, grid->beta, mu});
}

ContourKernel bare_local(const GridPtr& grid, const QuadratureGrid& quad, const FieldProtocol& fp,
                         const ThermalState& ts) {
  CMatrix acc = CMatrix::Zero(grid->size(), grid->size());
  CMatrix m;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    fill_bare_gk(m, quad.eps[k], quad.epsb[k], *grid, fp, ts.mu);
    acc += quad.weight[k] * m;
  }
  return ContourKernel(grid, std::move(acc));
}

}  // namespace nefk
