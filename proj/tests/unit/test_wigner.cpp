#include "doctest.h"
#include "nefk/propagators.hpp"
#include "nefk/equilibrium.hpp"
#include "nefk/wigner.hpp"

using namespace nefk;

TEST_CASE("Wigner round trip and masking") {
  const int n = 9;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(i + 0.1 * j, i * j);
  auto wf = to_wigner(a, 0.0, 0.5, 1.0);
  CHECK(wf.slices.size() == 2 * n - 1);
  CHECK((from_wigner(wf) - a).cwiseAbs().maxCoeff() == 0.0);
  const auto& sl = wf.at(2.0);
  CHECK(sl.s == 8);
  // t = 0 .. 4 in 0.5 steps; t_on = 1 masks samples with one time below 1
  for (int k = 0; k < sl.t_rel.size(); ++k) {
    const int i = sl.i_index[k], j = sl.s - i;
    const bool mixed = (i * 0.5 < 1.0) != (j * 0.5 < 1.0);
    CHECK(static_cast<bool>(sl.field_mix[k]) == mixed);
  }
  CHECK(sl.unmasked_extent() == doctest::Approx(2.0));
}

TEST_CASE("one-sided transform of a decaying exponential") {
  // F(t) = -i exp(-g t): exact transform -i/(g - i w); trapezoid error is O(dt^2)
  const double dt = 0.01, g = 0.5;
  const int n = 4001;
  CMatrix r = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) r(i, j) = cplx(0.0, -1.0) * std::exp(-g * (i - j) * dt);
  auto wf = to_wigner(r, 0.0, dt, 0.0);
  const auto& sl = wf.slices[n - 1];
  RVector om(3);
  om << -1.0, 0.0, 0.7;
  WindowPolicy none;
  none.taper_fraction = 0.0;
  CVector f = wigner_to_frequency(sl, om, Sidedness::one_sided, none);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(f[k] - cplx(0.0, -1.0) / cplx(g, -om[k])) < 1e-3);
}

TEST_CASE("particle-hole relation on a free level") {
  auto grid = build_contour(0.0, 2.0, 3.0, 0.1, 10);
  auto c = extract_components(bare_isolated_level(grid, 0.0, 0.0));
  CHECK(check_ph_relation(c.retarded, c.lesser) < 1e-14);
  auto off = extract_components(bare_isolated_level(grid, 0.0, 0.4));
  CHECK(check_ph_relation(off.retarded, off.lesser) > 1e-3);
}

TEST_CASE("FDT check vanishes on an exact construction") {
  RVector om = omega_grid(-3, 3, 50);
  CVector sr(om.size()), sl(om.size());
  const double beta = 4.0;
  for (int k = 0; k < om.size(); ++k) {
    sr[k] = cplx(0.1 * om[k], -std::exp(-om[k] * om[k]));
    sl[k] = -2.0 * I_unit * fermi_beta(om[k], beta) * sr[k].imag();
  }
  auto d = check_fdt(sr, sl, om, beta);
  CHECK(d.linf < 1e-14);
  auto wrong = check_fdt(sr, sl, om, 1.0);
  CHECK(wrong.linf > 1e-2);
}

TEST_CASE("padded grid spacing") {
  WignerSlice sl;
  sl.t_rel = RVector::LinSpaced(101, -10.0, 10.0);
  sl.values = CVector::Zero(101);
  sl.field_mix.assign(101, 0);
  auto om = padded_frequency_grid(sl, 4, 2.0);
  REQUIRE(om.size() > 2);
  CHECK(om[1] - om[0] == doctest::Approx(2 * M_PI / (4 * 101 * 0.2)).epsilon(1e-12));
  CHECK(om.cwiseAbs().maxCoeff() <= 2.0);
}
