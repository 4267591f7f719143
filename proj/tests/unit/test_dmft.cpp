#include "doctest.h"
#include "nefk/dmft.hpp"
#include "nefk/errors.hpp"
#include "nefk/wigner.hpp"

using namespace nefk;

namespace {
double max_upper(const CMatrix& m) {
  double d = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j)));
  return d;
}
}  // namespace

TEST_CASE("U = 0 converges immediately with zero self-energy") {
  auto g = build_contour(0.0, 2.0, 10.0, 0.1, 20);
  auto q = gauss_hermite_joint(10, 1e-12);
  auto sol = scf_solve(half_filling(0.0, 0.1, FieldProtocol{0.5, 0.5}), g, q);
  CHECK(sol.iterations == 1);
  CHECK(sol.sigma.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("impurity resolvent reproduces a shifted level") {
  // for an isolated level g0, (g0^-1 - U)^-1 is the level raised by U;
  // interior points converge at second order, the turning-point rows at first
  const double eps = -0.3, U = 0.8;
  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    auto g = build_contour(0.0, 2.0, 2.0, h, static_cast<int>(std::lround(2.0 / h)) + 1);
    auto g0 = bare_isolated_level(g, 0.0, eps);
    auto gi = impurity_green(g0, U, 1.0);
    auto a = extract_components(gi), b = extract_components(bare_isolated_level(g, 0.0, eps + U));
    const int n = g->n_t;
    const double interior = (a.retarded - b.retarded).block(1, 1, n - 2, n - 2).cwiseAbs().maxCoeff();
    CHECK(interior < 3e-4);
    CHECK((a.lesser - b.lesser).cwiseAbs().maxCoeff() < 5e-3);
    if (prev > 0) CHECK(prev / interior == doctest::Approx(4.0).epsilon(0.05));
    prev = interior;
    auto half = impurity_green(g0, U, 0.5);
    CHECK((half.values - 0.5 * (g0.values + gi.values)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK_THROWS_AS(impurity_green(g0, U, 1.5), ConfigError);
  }
}

TEST_CASE("interacting driven run: causality, symmetry, Langreth, pairing") {
  auto g = build_contour(0.0, 3.0, 5.0, 0.1, 21);
  auto q = gauss_hermite_joint(10, 1e-12);
  auto p = half_filling(1.0, 0.2, FieldProtocol{0.5, 1.0});
  ScfOptions o;
  o.tol = 1e-8;
  auto sol = scf_solve(p, g, q, o);
  CHECK(sol.residual_history.back() < 1e-8);
  auto cg = extract_components(sol.g_loc), cs = extract_components(sol.sigma);
  CHECK(max_upper(cg.retarded) <= 1e-12);
  CHECK(max_upper(cs.retarded) <= 1e-12);
  CHECK(check_ph_relation(cg.retarded, cg.lesser) < 1e-12);
  CHECK(langreth_lesser_residual(sol.g_hat, sol.sigma, sol.g_loc) < 10 * o.tol);
  // the plain trapezoid rules differ from the solver's quadrature at O(dt^2)
  CHECK(langreth_lesser_residual(sol.g_hat, sol.sigma, sol.g_loc, true) > 1e-6);

  const ThermalState ts = p.lattice_thermal();
  LatticeOptions no_pair;
  no_pair.allow_pairing = false;
  auto a = lattice_sum_full(sol.sigma, q, p.fp, ts);
  auto b = lattice_sum_full(sol.sigma, q, p.fp, ts, no_pair);
  CHECK(a.nodes.size() < b.nodes.size());
  CHECK((a.g_loc.values - b.g_loc.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("thread count does not change the result") {
  auto g = build_contour(0.0, 1.0, 5.0, 0.1, 11);
  auto q = gauss_hermite_joint(8, 1e-12);
  auto p = half_filling(1.0, 0.2, FieldProtocol{0.5, 0.2});
  ScfOptions o1, o3;
  o1.threads = 1;
  o3.threads = 3;
  auto a = scf_solve(p, g, q, o1), b = scf_solve(p, g, q, o3);
  CHECK((a.sigma.values - b.sigma.values).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("max_iter exhaustion reports the history") {
  auto g = build_contour(0.0, 1.0, 5.0, 0.1, 11);
  auto q = gauss_hermite_joint(6, 1e-12);
  ScfOptions o;
  o.max_iter = 2;
  o.tol = 1e-14;
  try {
    scf_solve(half_filling(1.5, 0.2, FieldProtocol{0.5, 0.2}), g, q, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.history().size() == 2);
  }
}

TEST_CASE("extrapolation weights") {
  const std::array<double, 3> h{0.1, 1.0 / 15.0, 0.05};
  auto w = richardson_weights(h);
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0));
  // exact for a + b h + c h^2
  double v = 0;
  for (int i = 0; i < 3; ++i) v += w[i] * (2.0 + 3.0 * h[i] - 5.0 * h[i] * h[i]);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
  auto c = common_lattice(h, 0.0, 2.0);
  CHECK(c.step == doctest::Approx(0.2));
  CHECK(c.n == 11);
  CHECK(c.stride == std::array<int, 3>{2, 3, 4});
  CHECK_THROWS_AS(common_lattice({0.1, 0.1, 0.05}, 0.0, 2.0), ConfigError);
  CHECK_THROWS_AS(common_lattice({0.1, 0.07, 0.05}, 0.0, 2.0), ConfigError);
}

TEST_CASE("series extrapolation removes a quadratic error") {
  const std::array<double, 3> h{0.1, 1.0 / 15.0, 0.05};
  std::array<RVector, 3> s;
  for (int r = 0; r < 3; ++r) {
    const int n = static_cast<int>(std::lround(2.0 / h[r])) + 1;
    s[r].resize(n);
    for (int i = 0; i < n; ++i) {
      const double t = i * h[r];
      s[r][i] = std::sin(t) + h[r] * h[r] * std::cos(3 * t);
    }
  }
  RVector e = extrapolate_series(s, h, 0.0, 2.0);
  for (int i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(std::sin(0.2 * i)).epsilon(1e-12));
}
