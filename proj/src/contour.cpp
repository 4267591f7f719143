#include "nefk/contour.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nefk {

bool ContourGrid::same_as(const ContourGrid& o) const {
  return this == &o || (t_min == o.t_min && t_max == o.t_max && dt == o.dt && beta == o.beta &&
                        n_tau == o.n_tau && n_t == o.n_t);
}

GridPtr build_contour(double t_min, double t_max, double beta, double dt, int n_tau) {
  if (!(t_max > t_min)) throw ConfigError("contour: t_max must exceed t_min");
  if (!(dt > 0)) throw ConfigError("contour: dt must be positive");
  if (!(beta > 0)) throw ConfigError("contour: beta must be positive");
  if (n_tau < 2) throw ConfigError("contour: n_tau must be at least 2");
  const double steps = (t_max - t_min) / dt;
  const double nearest = std::round(steps);
  if (nearest < 1 || std::abs(steps - nearest) > 1e-9 * std::max(1.0, nearest)) {
    std::ostringstream os;
    os << "contour: (t_max - t_min)/dt = " << steps << " is not an integer";
    throw ConfigError(os.str());
  }
  auto g = std::make_shared<ContourGrid>();
  g->t_min = t_min;
  g->t_max = t_max;
  g->n_t = static_cast<int>(nearest) + 1;
  g->dt = (t_max - t_min) / nearest;
  g->beta = beta;
  g->n_tau = n_tau;
  const int nt = g->n_t;
  const int n = 2 * nt + n_tau;
  g->points.resize(n);
  g->weights.resize(n);
  for (int i = 0; i < nt; ++i) {
    const double t = g->time(i);
    g->points[g->fwd(i)] = {Branch::forward, t, 0.0};
    g->points[g->bwd(i)] = {Branch::backward, t, 0.0};
    g->weights[g->fwd(i)] = g->dt;
    g->weights[g->bwd(i)] = -g->dt;
  }
  const double dtau = g->dtau();
  for (int k = 0; k < n_tau; ++k) {
    g->points[g->spur(k)] = {Branch::spur, t_min, k * dtau};
    g->weights[g->spur(k)] = cplx(0.0, -dtau);
  }
  for (int e : {0, nt - 1, nt, 2 * nt - 1, 2 * nt, n - 1}) g->weights[e] *= 0.5;
  return g;
}

ContourKernel::ContourKernel(GridPtr g, CMatrix v) : grid(std::move(g)), values(std::move(v)) {
  if (values.rows() != grid->size() || values.cols() != grid->size())
    throw ConfigError("kernel: shape does not match grid");
}

ContourKernel ContourKernel::zero(GridPtr g) {
  const int n = g->size();
  return ContourKernel(std::move(g), CMatrix::Zero(n, n));
}

static void require_same_grid(const ContourKernel& a, const ContourKernel& b) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid)) throw ConfigError("kernels live on different grids");
}

ContourKernel contour_delta(const GridPtr& grid) {
  CMatrix d = CMatrix::Zero(grid->size(), grid->size());
  d.diagonal() = grid->weights.cwiseInverse();
  return ContourKernel(grid, std::move(d));
}

CMatrix weighted_product(const CMatrix& a, const CVector& w, const CMatrix& b) {
  return a * (w.asDiagonal() * b);
}

ContourKernel convolve(const ContourKernel& a, const ContourKernel& b) {
  require_same_grid(a, b);
  return ContourKernel(a.grid, weighted_product(a.values, a.grid->weights, b.values));
}

ContourKernel invert(const ContourKernel& a, double rcond_min) {
  const CVector& w = a.grid->weights;
  CMatrix m = w.asDiagonal() * a.values * w.asDiagonal();
  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > rcond_min)) {
    std::ostringstream os;
    os << "invert: operator is singular or ill-conditioned (condition estimate " << 1.0 / rc << ")";
    throw SingularKernel(os.str(), 1.0 / rc);
  }
  return ContourKernel(a.grid, lu.inverse());
}

ComponentSet extract_components(const ContourKernel& a) {
  const ContourGrid& g = *a.grid;
  const int nt = g.n_t, nm = g.n_tau;
  ComponentSet c;
  c.lesser.resize(nt, nt);
  c.greater.resize(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      c.lesser(i, j) = a.values(g.fwd(i), g.bwd(j));
      c.greater(i, j) = a.values(g.bwd(i), g.fwd(j));
    }
  c.retarded = CMatrix::Zero(nt, nt);
  c.advanced = CMatrix::Zero(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j <= i; ++j) {
      c.retarded(i, j) = c.greater(i, j) - c.lesser(i, j);
      c.advanced(j, i) = c.lesser(j, i) - c.greater(j, i);
    }
  c.matsubara = a.values.block(2 * nt, 2 * nt, nm, nm);
  c.mixed_right = a.values.block(0, 2 * nt, nt, nm);
  c.mixed_left = a.values.block(2 * nt, 0, nm, nt);
  return c;
}

ContourKernel assemble_from_components(const GridPtr& grid, const CMatrix& lesser, const CMatrix& greater,
                                       const CMatrix& matsubara, const CMatrix& mixed_right,
                                       const CMatrix& mixed_left) {
  const ContourGrid& g = *grid;
  const int nt = g.n_t, nm = g.n_tau;
  CMatrix v(g.size(), g.size());
  auto real_time = [&](int z, int zp, int i, int j) {
    if (z > zp) return greater(i, j);
    if (z < zp) return lesser(i, j);
    return 0.5 * (greater(i, j) + lesser(i, j));
  };
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      v(g.fwd(i), g.fwd(j)) = real_time(g.fwd(i), g.fwd(j), i, j);
      v(g.bwd(i), g.bwd(j)) = real_time(g.bwd(i), g.bwd(j), i, j);
      v(g.fwd(i), g.bwd(j)) = lesser(i, j);
      v(g.bwd(i), g.fwd(j)) = greater(i, j);
    }
  v.block(2 * nt, 2 * nt, nm, nm) = matsubara;
  for (int i = 0; i < nt; ++i)
    for (int k = 0; k < nm; ++k) {
      v(g.fwd(i), g.spur(k)) = mixed_right(i, k);
      v(g.bwd(i), g.spur(k)) = mixed_right(i, k);
      v(g.spur(k), g.fwd(i)) = mixed_left(k, i);
      v(g.spur(k), g.bwd(i)) = mixed_left(k, i);
    }
  return ContourKernel(grid, std::move(v));
}

namespace {
constexpr char kMagic[8] = {'N', 'E', 'F', 'K', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;
static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian hosts");

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("snapshot: truncated file");
  return v;
}
}  // namespace

void write_snapshot(const std::string& path, const ContourKernel& k) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("snapshot: cannot open " + path + " for writing");
  const ContourGrid& g = *k.grid;
  os.write(kMagic, 8);
  put(os, kVersion);
  put(os, std::uint32_t{0});
  put(os, g.t_min);
  put(os, g.t_max);
  put(os, g.dt);
  put(os, g.beta);
  put(os, static_cast<std::int64_t>(g.n_tau));
  put(os, static_cast<std::int64_t>(g.size()));
  const int n = g.size();
  std::vector<double> row(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      row[2 * j] = k.values(i, j).real();
      row[2 * j + 1] = k.values(i, j).imag();
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!os) throw ConfigError("snapshot: write failed for " + path);
}

ContourKernel read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("snapshot: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("snapshot: bad magic in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw ConfigError("snapshot: unsupported version " + std::to_string(version));
  get<std::uint32_t>(is);
  const double t_min = get<double>(is), t_max = get<double>(is), dt = get<double>(is), beta = get<double>(is);
  const auto n_tau = get<std::int64_t>(is);
  const auto n = get<std::int64_t>(is);
  GridPtr g = build_contour(t_min, t_max, beta, dt, static_cast<int>(n_tau));
  if (g->size() != n) throw ConfigError("snapshot: point count does not match grid metadata");
  CMatrix v(n, n);
  std::vector<double> row(2 * n);
  for (std::int64_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!is) throw ConfigError("snapshot: truncated table in " + path);
    for (std::int64_t j = 0; j < n; ++j) v(i, j) = cplx(row[2 * j], row[2 * j + 1]);
  }
  return ContourKernel(std::move(g), std::move(v));
}

}  // namespace nefk
