#include "nefk/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <sstream>

#include "nefk/propagators.hpp"

namespace nefk {

namespace {

constexpr int kWeidemanN = 64;

struct Weideman {
  double L;
  std::array<double, kWeidemanN> a;  // a[0] multiplies Z^(N-1)
  Weideman() {
    const int n = kWeidemanN, m = 2 * n, m2 = 2 * m;
    L = std::sqrt(n / std::sqrt(2.0));
    std::vector<double> f(m2, 0.0);
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double t = L * std::tan(0.5 * k * M_PI / m);
      f[k + m] = std::exp(-t * t) * (L * L + t * t);
    }
    std::vector<double> shifted(m2);
    for (int i = 0; i < m2; ++i) shifted[i] = f[(i + m) % m2];
    for (int j = 1; j <= n; ++j) {
      double s = 0.0;
      for (int i = 0; i < m2; ++i) s += shifted[i] * std::cos(2.0 * M_PI * j * i / m2);
      a[n - j] = s / m2;
    }
  }
  cplx eval(cplx z) const {
    const cplx den = L - I_unit * z;
    const cplx zz = (L + I_unit * z) / den;
    cplx p = 0.0;
    for (double c : a) p = p * zz + c;
    return 2.0 * p / (den * den) + (1.0 / std::sqrt(M_PI)) / den;
  }
};

const Weideman& weideman() {
  static const Weideman w;
  return w;
}

// Analytic continuation of the retarded transform into the lower half plane,
// used only for trial Newton steps.
cplx hilbert_continued(cplx z, double scale) {
  if (scale == 0.0) return 1.0 / z;
  const cplx u = z / scale;
  cplx w;
  if (u.imag() >= 0)
    w = weideman().eval(u);
  else
    w = 2.0 * std::exp(-u * u) - weideman().eval(-u);
  return -I_unit * std::sqrt(M_PI) * w / scale;
}

}  // namespace

cplx faddeeva(cplx z) {
  if (z.imag() < 0) throw ConfigError("faddeeva: requires Im z >= 0");
  return weideman().eval(z);
}

cplx hilbert_gaussian(cplx z, double scale) {
  if (!(z.imag() > 0)) throw ConfigError("hilbert_gaussian: requires Im z > 0");
  if (scale < 0) throw ConfigError("hilbert_gaussian: hopping scale must be non-negative");
  return hilbert_continued(z, scale);
}

RVector omega_grid(double lo, double hi, int n) {
  if (!(hi > lo) || n < 2) throw ConfigError("omega_grid: need hi > lo and n >= 2");
  RVector w(n);
  const double h = (hi - lo) / n;
  for (int k = 0; k < n; ++k) w[k] = lo + (k + 0.5) * h;
  return w;
}

namespace {

// zeta - 1/G(zeta); the moment series avoids cancellation at large |zeta|.
cplx inverse_shift(cplx zeta, double scale) {
  if (scale == 0.0) return 0.0;
  const cplx u = zeta / scale;
  if (std::abs(u) > 20.0 && u.imag() > -1.0) {
    constexpr int K = 7;
    std::array<double, K + 1> m{}, b{};
    m[0] = 1.0;
    for (int k = 1; k <= K; ++k) m[k] = m[k - 1] * (2 * k - 1) / 2.0;
    b[0] = 1.0;
    for (int k = 1; k <= K; ++k) {
      b[k] = 0.0;
      for (int j = 1; j <= k; ++j) b[k] -= m[j] * b[k - j];
    }
    const cplx x = 1.0 / (u * u);
    cplx sum = 0.0;
    for (int k = K; k >= 1; --k) sum = (sum + b[k]) * x;
    return -zeta * sum;
  }
  return zeta - 1.0 / hilbert_continued(zeta, scale);
}

struct PointMap {
  const EqParams& p;
  cplx z;
  double a, b, mu;
  cplx green(cplx sigma) const {
    const cplx zeta = z + mu - sigma;
    return 1.0 / (zeta - inverse_shift(zeta, p.hopping));
  }
  cplx residual(cplx sigma, cplx* g_out = nullptr) const {
    const cplx zeta = z + mu - sigma;
    const cplx d = inverse_shift(zeta, p.hopping);
    const cplx g = 1.0 / (zeta - d);
    const cplx y = z + mu - d;
    const cplx gn = (1.0 - p.w1) / (y + a) + p.w1 / (y - b);
    if (g_out) *g_out = g;
    return 1.0 / g - 1.0 / gn;
  }
};

bool physical(cplx sigma, cplx g) {
  const double slack = 1e-9 * (1.0 + std::abs(sigma));
  return sigma.imag() <= slack && g.imag() <= slack;
}

}  // namespace

EqPoint eq_solve_point(cplx z, const EqParams& p, cplx guess, double tol) {
  PointMap map{p, z, p.U * p.w1, p.U * (1.0 - p.w1), p.mu_lattice()};
  cplx s = guess;
  cplx g;
  cplx r = map.residual(s, &g);
  EqPoint out;
  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    const double h = 1e-7 * (1.0 + std::abs(s));
    const cplx d = (map.residual(s + h) - r) / h;
    cplx step = d != 0.0 ? -r / d : cplx(0.0);
    double lam = 1.0;
    cplx s_new = s + step, g_new;
    cplx r_new = map.residual(s_new, &g_new);
    while ((!std::isfinite(std::abs(r_new)) || std::abs(r_new) > std::abs(r)) && lam > 1e-6) {
      lam *= 0.5;
      s_new = s + lam * step;
      r_new = map.residual(s_new, &g_new);
    }
    s = s_new;
    r = r_new;
    g = g_new;
    if (std::abs(lam * step) <= tol * (1.0 + std::abs(s)) && std::abs(r) <= 1e3 * tol * (1.0 + std::abs(1.0 / g))) break;
  }
  if (!(std::abs(r) <= 1e-8 * (1.0 + std::abs(1.0 / g))) || !physical(s, g)) {
    // Damped fixed point from the asymptotic guess as a fallback.
    s = p.w1 * (1.0 - p.w1) * p.U * p.U / (z + map.mu);
    for (int it = 0; it < 20000; ++it) {
      const cplx zeta = z + map.mu - s;
      const cplx y = z + map.mu - inverse_shift(zeta, p.hopping);
      const cplx gn = (1.0 - p.w1) / (y + map.a) + p.w1 / (y - map.b);
      const cplx sn = y - 1.0 / gn;
      const double d = std::abs(sn - s);
      s = 0.5 * s + 0.5 * sn;
      if (d <= tol * (1.0 + std::abs(s))) break;
    }
    r = map.residual(s, &g);
    if (!(std::abs(r) <= 1e-8 * (1.0 + std::abs(1.0 / g)))) {
      std::ostringstream os;
      os << "eq_solve_point: no convergence at z = " << z << " (residual " << std::abs(r) << ")";
      throw ConvergenceError(os.str(), {std::abs(r)});
    }
  }
  out.sigma = s;
  out.g = g;
  return out;
}

EqSolution eq_scf(const EqParams& p, const RVector& omega, double tol, double eta) {
  if (!(tol > 0)) throw ConfigError("eq_scf: tol must be positive");
  if (!(p.T > 0)) throw ConfigError("eq_scf: temperature must be positive");
  EqSolution sol;
  sol.omega = omega;
  sol.params = p;
  sol.eta = eta;
  const int n = static_cast<int>(omega.size());
  sol.sigma_r.resize(n);
  sol.g_r.resize(n);
  sol.dos.resize(n);
  const double mu = p.mu_lattice();
  auto sweep = [&](int from, int to, int stepdir) {
    cplx guess;
    bool first = true;
    for (int k = from; k != to; k += stepdir) {
      const cplx z(omega[k], eta);
      if (first) guess = p.w1 * (1.0 - p.w1) * p.U * p.U / (z + mu);
      first = false;
      const EqPoint pt = eq_solve_point(z, p, guess, tol);
      sol.sigma_r[k] = pt.sigma;
      sol.g_r[k] = pt.g;
      sol.dos[k] = -pt.g.imag() / M_PI;
      guess = pt.sigma;
    }
  };
  int split = 0;
  while (split < n && omega[split] < 0) ++split;
  sweep(0, split, 1);
  sweep(n - 1, split - 1, -1);
  return sol;
}

DressedSpectrum fk_dress_steady(const CVector& g0, double w1, double U) {
  DressedSpectrum out;
  out.g.resize(g0.size());
  for (int k = 0; k < g0.size(); ++k) {
    if (g0[k] == 0.0) throw ConfigError("fk_dress_steady: G0 vanishes on the grid");
    const cplx shifted = 1.0 / g0[k] - U;
    if (std::abs(shifted) < 1e-12) {
      out.poles.push_back(k);
      out.g[k] = (1.0 - w1) * g0[k];
      continue;
    }
    out.g[k] = (1.0 - w1) * g0[k] + w1 / shifted;
  }
  return out;
}

double equilibrium_energy(const EqParams& p, double T) {
  if (!(T > 0)) throw ConfigError("equilibrium_energy: temperature must be positive");
  const double beta = 1.0 / T;
  const double gamma = 2.0 * M_PI * T;
  const double mu = p.mu_lattice();
  const double h = std::min(0.02, M_PI * T / 6.0);
  const double xmax = 30.0 + 40.0 * T + std::abs(mu);
  const int n = static_cast<int>(std::ceil(2.0 * xmax / h));
  const double hx = 2.0 * xmax / n;

  auto guess_at = [&](cplx z) { return p.w1 * (1.0 - p.w1) * p.U * p.U / (z + mu); };
  cplx total = 0.0;
  cplx guess = guess_at(cplx(-xmax, gamma));
  for (int k = 0; k <= n; ++k) {
    const cplx z(-xmax + k * hx, gamma);
    const EqPoint pt = eq_solve_point(z, p, guess);
    guess = pt.sigma;
    const double c = (k == 0 || k == n) ? 0.5 : 1.0;
    total += c * hx * z * fermi_beta(z, beta) * pt.g;
  }
  // Left tail beyond -xmax: f = 1 there, integrate z G - 1 with x = -xmax e^s.
  const double ds = 0.02;
  const int ns = 800;
  guess = guess_at(cplx(-xmax, gamma));
  for (int k = 0; k <= ns; ++k) {
    const double x = -xmax * std::exp(k * ds);
    const cplx z(x, gamma);
    const EqPoint pt = eq_solve_point(z, p, guess);
    guess = pt.sigma;
    const double c = (k == 0 || k == ns) ? 0.5 : 1.0;
    total += c * ds * (-x) * (z * pt.g * fermi_beta(z, beta) - 1.0);
  }
  const cplx z0(0.0, M_PI * T);
  const EqPoint p0 = eq_solve_point(z0, p, guess_at(z0));
  total += 2.0 * M_PI * M_PI * T * T * p0.g;
  // Closing segment at Re z -> -inf, where z f G -> 1.
  total += cplx(0.0, gamma);
  return -total.imag() / M_PI;
}

double CalibrationTable::energy_at(double b) const {
  if (beta.size() < 4) throw ConfigError("calibration: need at least four nodes");
  if (b <= beta.front()) return energy.front();
  if (b >= beta.back()) return energy.back();
  boost::math::interpolators::pchip<std::vector<double>> spline{std::vector<double>(beta), std::vector<double>(energy)};
  return spline(b);
}

CalibrationTable energy_vs_temperature(const EqParams& p, std::vector<double> T_list) {
  if (T_list.size() < 3) throw ConfigError("calibration: need at least three temperatures");
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    if (!(T_list[i] > 0)) throw ConfigError("calibration: temperatures must be positive");
    if (i && !(T_list[i] > T_list[i - 1])) throw ConfigError("calibration: temperatures must be sorted ascending");
  }
  CalibrationTable t;
  t.plateau = -0.5 * p.mu_lattice();
  t.T.push_back(INFINITY);
  t.beta.push_back(0.0);
  t.energy.push_back(t.plateau);
  for (auto it = T_list.rbegin(); it != T_list.rend(); ++it) {
    t.T.push_back(*it);
    t.beta.push_back(1.0 / *it);
    t.energy.push_back(equilibrium_energy(p, *it));
  }
  for (std::size_t i = 1; i < t.energy.size(); ++i)
    if (!(t.energy[i] < t.energy[i - 1])) {
      std::ostringstream os;
      os << "calibration: energy is not monotone in temperature near T = " << t.T[i];
      throw ConvergenceError(os.str(), {});
    }
  return t;
}

TemperatureEstimate temperature_from_energy(const CalibrationTable& table, double e) {
  TemperatureEstimate out;
  if (e >= table.plateau - 1e-14 * std::max(1.0, std::abs(table.plateau))) {
    out.saturated = true;
    out.T = INFINITY;
    out.beta = 0.0;
    return out;
  }
  for (std::size_t i = 1; i < table.energy.size(); ++i)
    if (table.energy[i] == e) {
      out.T = table.T[i];
      out.beta = table.beta[i];
      return out;
    }
  if (e < table.energy.back()) {
    std::ostringstream os;
    os << "temperature_from_energy: energy " << e << " lies below the coldest calibration point "
       << table.energy.back() << " (unphysical cooling)";
    throw ConfigError(os.str());
  }
  boost::math::interpolators::pchip<std::vector<double>> spline(std::vector<double>(table.beta),
                                                                std::vector<double>(table.energy));
  double lo = 0.0, hi = table.beta.back();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spline(mid) > e)
      lo = mid;
    else
      hi = mid;
  }
  out.beta = 0.5 * (lo + hi);
  out.T = 1.0 / out.beta;
  return out;
}

}  // namespace nefk
