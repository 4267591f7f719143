#include "nefk/lattice.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "nefk/errors.hpp"

namespace nefk {

namespace {

// Physicists' Hermite nodes and weights normalized to the unit-mass density.
void hermite_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    double r = es.eigenvalues()(k);
    // Newton polish on the orthonormal recurrence.
    for (int it = 0; it < 4; ++it) {
      double p0 = std::pow(M_PI, -0.25), p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = r * std::sqrt(2.0 / j) * p1 - std::sqrt((j - 1.0) / j) * p2;
      }
      const double pd = std::sqrt(2.0 * n) * p1;
      r -= p0 / pd;
    }
    double p0 = std::pow(M_PI, -0.25), p1 = 0.0;
    for (int j = 1; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = r * std::sqrt(2.0 / j) * p1 - std::sqrt((j - 1.0) / j) * p2;
    }
    x[k] = r;
    w[k] = 1.0 / (n * p0 * p0 * std::sqrt(M_PI));
  }
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  for (int k = 0; k < n / 2; ++k) {
    const double a = 0.5 * (x[n - 1 - k] - x[k]);
    x[k] = -a;
    x[n - 1 - k] = a;
    const double b = 0.5 * (w[k] + w[n - 1 - k]);
    w[k] = w[n - 1 - k] = b;
  }
  if (n % 2) x[n / 2] = 0.0;
}

}  // namespace

QuadratureGrid gauss_hermite_joint(int order, double prune) {
  if (order < 2) throw ConfigError("gauss_hermite_joint: order must be at least 2");
  if (prune < 0) throw ConfigError("gauss_hermite_joint: prune threshold must be non-negative");
  std::vector<double> x, w;
  hermite_rule(order, x, w);
  QuadratureGrid q;
  q.order = order;
  double total = 0.0;
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) {
      const double wij = w[i] * w[j];
      if (prune > 0 && wij <= prune) continue;
      q.eps.push_back(x[i]);
      q.epsb.push_back(x[j]);
      q.weight.push_back(wij);
      total += wij;
    }
  if (prune > 0)
    for (double& v : q.weight) v /= total;
  return q;
}

QuadratureGrid merge_by_energy(const QuadratureGrid& q) {
  std::map<double, std::pair<double, double>> acc;
  for (std::size_t n = 0; n < q.size(); ++n) {
    auto& a = acc[q.eps[n]];
    a.first += q.weight[n];
    a.second += q.weight[n] * q.epsb[n];
  }
  QuadratureGrid m;
  m.order = q.order;
  for (const auto& [e, a] : acc) {
    m.eps.push_back(e);
    const double mean = a.second / a.first;
    m.epsb.push_back(std::abs(mean) < 1e-14 ? 0.0 : mean);
    m.weight.push_back(a.first);
  }
  return m;
}

double instantaneous_dispersion(double eps, double epsb, double t, const FieldProtocol& fp) {
  if (t < fp.t_on) return eps;
  const double s = fp.E * (t - fp.t_on);
  return eps * std::cos(s) - epsb * std::sin(s);
}

double dispersion_antiderivative(double eps, double epsb, double t, const FieldProtocol& fp) {
  const double tau = t - fp.t_on;
  if (tau <= 0 || fp.E == 0.0) return eps * tau;
  const double s = fp.E * tau;
  const double half = std::sin(0.5 * s);
  return (eps * std::sin(s) - 2.0 * epsb * half * half) / fp.E;
}

double phase_integral(double eps, double epsb, double t, double tp, const FieldProtocol& fp) {
  return dispersion_antiderivative(eps, epsb, t, fp) - dispersion_antiderivative(eps, epsb, tp, fp);
}

double band_velocity(double eps, double epsb, double t, const FieldProtocol& fp) {
  const double s = t > fp.t_on ? fp.E * (t - fp.t_on) : 0.0;
  return -(eps * std::sin(s) + epsb * std::cos(s));
}

}  // namespace nefk
