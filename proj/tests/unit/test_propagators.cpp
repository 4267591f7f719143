#include "doctest.h"
#include "nefk/propagators.hpp"

using namespace nefk;

TEST_CASE("Fermi function limits") {
  CHECK(fermi(0.0, 0.1) == doctest::Approx(0.5));
  CHECK(fermi(50.0, 0.1) < 1e-200);
  CHECK(fermi(-50.0, 0.1) == doctest::Approx(1.0));
  CHECK(fermi_beta(3.0, 0.0) == 0.5);
  CHECK(fermi_beta(-1e6, 10.0) == 1.0);
  CHECK(fermi_beta(1e6, 10.0) == 0.0);
  const cplx z(0.3, 0.2);
  CHECK(std::abs(fermi_beta(z, 2.0) - 1.0 / (std::exp(2.0 * z) + 1.0)) < 1e-14);
}

TEST_CASE("free local propagator is the Gaussian envelope") {
  // U = 0, E = 0: G^R_loc(t) = -i exp(-t^2/4) for the unit Gaussian density
  auto g = build_contour(0.0, 3.0, 10.0, 0.1, 21);
  auto q = gauss_hermite_joint(30);
  auto c = extract_components(bare_local(g, q, FieldProtocol{}, thermal_state(0.1, 0.0)));
  for (int i = 0; i < g->n_t; i += 5) {
    const double t = g->time(i);
    CHECK(std::abs(c.retarded(i, 0) - cplx(0.0, -std::exp(-t * t / 4.0))) < 1e-12);
  }
  CHECK(std::abs(c.lesser(7, 7) - cplx(0.0, 0.5)) < 1e-13);
}

TEST_CASE("driven band occupation is frozen") {
  // without scattering n_k(t) keeps its initial value even under a field
  auto g = build_contour(0.0, 4.0, 5.0, 0.1, 11);
  FieldProtocol fp{1.0, 1.0};
  const double eps = -0.6, epsb = 0.4;
  auto c = extract_components(bare_gk_contour(eps, epsb, g, fp, thermal_state(0.2, 0.0)));
  const double f = fermi(eps, 0.2);
  for (int i = 0; i < g->n_t; i += 7) CHECK(std::abs(c.lesser(i, i) - cplx(0.0, f)) < 1e-13);
}

TEST_CASE("driven phase follows the Peierls dispersion") {
  auto g = build_contour(0.0, 4.0, 5.0, 0.05, 11);
  FieldProtocol fp{0.8, 1.0};
  const double eps = 0.5, epsb = -0.9;
  auto c = extract_components(bare_gk_contour(eps, epsb, g, fp, thermal_state(1.0, 0.0)));
  const int i = 70, j = 10;
  const double ph = phase_integral(eps, epsb, g->time(i), g->time(j), fp);
  CHECK(std::abs(c.retarded(i, j) - (-I_unit) * std::exp(cplx(0.0, -ph))) < 1e-12);
}

TEST_CASE("spur block is overflow safe at large beta") {
  auto g = build_contour(0.0, 1.0, 200.0, 0.5, 30);
  auto k = bare_gk_contour(-3.0, 0.0, g, FieldProtocol{}, thermal_state(1.0 / 200.0, 0.0));
  CHECK(k.values.allFinite());
  auto k2 = bare_gk_contour(3.0, 0.0, g, FieldProtocol{}, thermal_state(1.0 / 200.0, 0.0));
  CHECK(k2.values.allFinite());
}

TEST_CASE("separable multiply matches the dense product") {
  auto g = build_contour(0.0, 2.0, 4.0, 0.1, 9);
  CMatrix g0, out;
  BareFactors bf;
  fill_bare_gk(g0, 0.4, -0.2, *g, FieldProtocol{0.5, 0.5}, 0.1, &bf);
  CMatrix s = CMatrix::Random(g->size(), g->size());
  bare_left_multiply(out, g0, bf, *g, s);
  CHECK((out - g0 * s).cwiseAbs().maxCoeff() < 1e-12);
}
