#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nefk/contour.hpp"
#include "nefk/errors.hpp"
#include "nefk/propagators.hpp"

using namespace nefk;

TEST_CASE("grid layout and weights") {
  auto g = build_contour(0.0, 2.0, 5.0, 0.5, 6);
  CHECK(g->n_t == 5);
  CHECK(g->size() == 16);
  CHECK(g->fwd(0) == 0);
  CHECK(g->bwd(0) == 9);
  CHECK(g->spur(0) == 10);
  CHECK(g->points[g->bwd(4)].t == doctest::Approx(2.0));
  // forward and backward branches cancel; the spur integrates to -i beta
  CHECK(std::abs(g->weights.head(10).sum()) < 1e-14);
  CHECK(std::abs(g->weights.tail(6).sum() - cplx(0.0, -5.0)) < 1e-13);
  CHECK(g->weights[0].real() == doctest::Approx(0.25));
  CHECK(g->weights[1].real() == doctest::Approx(0.5));
}

TEST_CASE("incommensurate or degenerate grids are rejected") {
  CHECK_THROWS_AS(build_contour(0.0, 1.0, 5.0, 0.3, 6), ConfigError);
  CHECK_THROWS_AS(build_contour(1.0, 1.0, 5.0, 0.1, 6), ConfigError);
  CHECK_THROWS_AS(build_contour(0.0, 1.0, 5.0, 0.1, 1), ConfigError);
  CHECK_THROWS_AS(build_contour(0.0, 1.0, -1.0, 0.1, 6), ConfigError);
}

TEST_CASE("delta is the convolution identity") {
  auto g = build_contour(0.0, 1.0, 4.0, 0.25, 5);
  auto a = bare_isolated_level(g, 0.0, 0.3);
  auto d = contour_delta(g);
  CHECK((convolve(d, a).values - a.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((convolve(a, d).values - a.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invert is an involution and rejects singular kernels") {
  auto g = build_contour(0.0, 1.0, 4.0, 0.25, 5);
  auto a = bare_isolated_level(g, 0.0, -0.4);
  auto back = invert(invert(a));
  CHECK((back.values - a.values).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(invert(ContourKernel::zero(g)), SingularKernel);
}

TEST_CASE("isolated level components match the closed forms") {
  const double eps = 0.7, beta = 3.0;
  auto g = build_contour(0.0, 2.0, beta, 0.1, 11);
  auto c = extract_components(bare_isolated_level(g, 0.0, eps));
  const double f = 1.0 / (std::exp(beta * eps) + 1.0);
  for (int i = 0; i < g->n_t; i += 4)
    for (int j = 0; j < g->n_t; j += 3) {
      const double dt = g->time(i) - g->time(j);
      const cplx ph = std::exp(cplx(0.0, -eps * dt));
      CHECK(std::abs(c.lesser(i, j) - cplx(0.0, f) * ph) < 1e-13);
      CHECK(std::abs(c.greater(i, j) - cplx(0.0, f - 1.0) * ph) < 1e-13);
      if (i >= j) CHECK(std::abs(c.retarded(i, j) + I_unit * ph) < 1e-13);
      if (i < j) CHECK(c.retarded(i, j) == cplx(0.0));
    }
  // Matsubara block: -i (1 - f) exp(-eps tau) for tau > tau'
  const int k = 7, kp = 2;
  const double tau = g->dtau() * (k - kp);
  CHECK(std::abs(c.matsubara(k, kp) - cplx(0.0, -(1.0 - f) * std::exp(-eps * tau))) < 1e-13);
}

TEST_CASE("assemble and extract are inverse") {
  auto g = build_contour(-1.0, 1.0, 2.0, 0.5, 4);
  auto a = bare_isolated_level(g, 0.2, 0.5);
  auto c = extract_components(a);
  auto b = assemble_from_components(g, c.lesser, c.greater, c.matsubara, c.mixed_right, c.mixed_left);
  CHECK((b.values - a.values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("theta_c convention") {
  CHECK(theta_c(3, 1) == 1.0);
  CHECK(theta_c(1, 3) == 0.0);
  CHECK(theta_c(2, 2) == 0.5);
}

TEST_CASE("snapshot round trip and corruption") {
  namespace fs = std::filesystem;
  auto g = build_contour(0.0, 1.0, 3.0, 0.25, 4);
  auto a = bare_isolated_level(g, 0.0, 0.1);
  const std::string path = (fs::temp_directory_path() / "nefk_test.snap").string();
  write_snapshot(path, a);
  auto b = read_snapshot(path);
  CHECK(b.grid->same_as(*g));
  CHECK(b.values == a.values);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS(read_snapshot(path));
  std::remove(path.c_str());
}
