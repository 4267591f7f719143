#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "nefk/errors.hpp"
#include "nefk/lattice.hpp"

using namespace nefk;

TEST_CASE("five-point rule matches frozen reference nodes") {
  // numpy.polynomial.hermite.hermgauss(5), weights divided by sqrt(pi)
  const double x[] = {-2.0201828704560856, -0.95857246461381851, 0.0, 0.95857246461381851, 2.0201828704560856};
  const double w[] = {1.1257411327720693e-02, 2.2207592200561260e-01, 5.3333333333333333e-01,
                      2.2207592200561260e-01, 1.1257411327720693e-02};
  auto q = gauss_hermite_joint(5);
  REQUIRE(q.size() == 25);
  for (std::size_t k = 0; k < q.size(); ++k) {
    int a = -1, b = -1;
    for (int i = 0; i < 5; ++i) {
      if (std::abs(q.eps[k] - x[i]) < 1e-13) a = i;
      if (std::abs(q.epsb[k] - x[i]) < 1e-13) b = i;
    }
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    CHECK(q.weight[k] == doctest::Approx(w[a] * w[b]).epsilon(1e-13));
  }
}

TEST_CASE("Gaussian moments") {
  for (int order : {2, 10, 20, 30}) {
    auto q = gauss_hermite_joint(order);
    double m0 = 0, m2 = 0, m4 = 0, mix = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      m0 += q.weight[k];
      m2 += q.weight[k] * q.eps[k] * q.eps[k];
      m4 += q.weight[k] * std::pow(q.epsb[k], 4);
      mix += q.weight[k] * q.eps[k] * q.epsb[k];
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(0.5).epsilon(1e-12));
    if (order >= 3) CHECK(m4 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::abs(mix) < 1e-14);
  }
  CHECK_THROWS_AS(gauss_hermite_joint(1), ConfigError);
}

TEST_CASE("pruning keeps the rule normalized") {
  auto full = gauss_hermite_joint(20);
  auto pr = gauss_hermite_joint(20, 1e-12);
  CHECK(pr.size() < full.size());
  double s = 0;
  for (double w : pr.weight) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("merging by energy preserves the eps marginal") {
  auto q = gauss_hermite_joint(8);
  auto m = merge_by_energy(q);
  CHECK(m.size() == 8);
  double s = 0, s2 = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    s += m.weight[k];
    s2 += m.weight[k] * m.eps[k] * m.eps[k];
  }
  CHECK(s == doctest::Approx(1.0));
  CHECK(s2 == doctest::Approx(0.5));
}

TEST_CASE("dispersion before and after the field") {
  FieldProtocol fp{0.5, 2.0};
  CHECK(instantaneous_dispersion(0.3, -0.8, 1.0, fp) == doctest::Approx(0.3));
  const double t = 5.0, s = 0.5 * 3.0;
  CHECK(instantaneous_dispersion(0.3, -0.8, t, fp) ==
        doctest::Approx(0.3 * std::cos(s) - (-0.8) * std::sin(s)).epsilon(1e-14));
  FieldProtocol none{0.0, 0.0};
  CHECK(instantaneous_dispersion(0.3, -0.8, 7.0, none) == doctest::Approx(0.3));
}

TEST_CASE("phase integral agrees with adaptive quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  FieldProtocol fp{0.7, 1.5};
  const double eps = -0.4, epsb = 1.1;
  auto f = [&](double x) { return instantaneous_dispersion(eps, epsb, x, fp); };
  // integrand has a kink at t_on, so split there
  auto integral = [&](double lo, double hi) {
    const double sign = hi >= lo ? 1.0 : -1.0;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    double r = 0.0;
    if (a < fp.t_on && b > fp.t_on)
      r = gauss_kronrod<double, 31>::integrate(f, a, fp.t_on, 10, 1e-14) +
          gauss_kronrod<double, 31>::integrate(f, fp.t_on, b, 10, 1e-14);
    else
      r = gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-14);
    return sign * r;
  };
  for (auto [t, tp] : {std::pair{4.0, 0.0}, std::pair{0.5, 3.0}, std::pair{2.0, 1.0}, std::pair{1.0, 1.4}})
    CHECK(phase_integral(eps, epsb, t, tp, fp) == doctest::Approx(integral(tp, t)).epsilon(1e-11));
}

TEST_CASE("band velocity is the time derivative over E") {
  FieldProtocol fp{0.5, 1.0};
  const double eps = 0.9, epsb = -0.3, t = 3.7, h = 1e-5;
  const double fd = (instantaneous_dispersion(eps, epsb, t + h, fp) - instantaneous_dispersion(eps, epsb, t - h, fp)) /
                    (2 * h) / fp.E;
  CHECK(band_velocity(eps, epsb, t, fp) == doctest::Approx(fd).epsilon(1e-8));
}
