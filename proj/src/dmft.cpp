#include "nefk/dmft.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

namespace nefk {

ModelParams half_filling(double U, double T, FieldProtocol fp) {
  ModelParams p;
  p.U = U;
  p.w1 = 0.5;
  p.mu = 0.5 * U;
  p.T = T;
  p.fp = fp;
  return p;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NEFK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

CMatrix solve_second_kind(const CMatrix& k, const CMatrix& rhs, const char* what) {
  CMatrix m = k;
  m.diagonal().array() += 1.0;
  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << what << ": operator is singular (condition estimate " << 1.0 / rc << ")";
    throw SingularKernel(os.str(), 1.0 / rc);
  }
  return lu.solve(rhs);
}

bool antisymmetric(const CMatrix& s) {
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  return (s + s.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

struct NodePlan {
  std::vector<int> rep;
  std::vector<char> paired;
};

NodePlan plan_nodes(const QuadratureGrid& q, bool pairing) {
  NodePlan plan;
  const int n = static_cast<int>(q.size());
  if (pairing) {
    std::map<std::pair<double, double>, int> index;
    for (int k = 0; k < n; ++k) index[{q.eps[k], q.epsb[k]}] = k;
    bool complete = true;
    for (int k = 0; k < n && complete; ++k) {
      auto it = index.find({-q.eps[k], -q.epsb[k]});
      complete = it != index.end() && q.weight[it->second] == q.weight[k];
    }
    if (complete) {
      for (int k = 0; k < n; ++k) {
        const bool self = q.eps[k] == 0.0 && q.epsb[k] == 0.0;
        if (self) {
          plan.rep.push_back(k);
          plan.paired.push_back(0);
        } else if (q.eps[k] > 0 || (q.eps[k] == 0.0 && q.epsb[k] > 0)) {
          plan.rep.push_back(k);
          plan.paired.push_back(1);
        }
      }
      return plan;
    }
  }
  for (int k = 0; k < n; ++k) {
    plan.rep.push_back(k);
    plan.paired.push_back(0);
  }
  return plan;
}

}  // namespace

LatticeResult lattice_sum_full(const ContourKernel& sigma, const QuadratureGrid& quad, const FieldProtocol& fp,
                               const ThermalState& ts, const LatticeOptions& opts) {
  const GridPtr& gp = sigma.grid;
  const ContourGrid& g = *gp;
  const int n = g.size();
  const bool sigma_zero = sigma.values.cwiseAbs().maxCoeff() == 0.0;
  const bool pairing = opts.allow_pairing && ts.mu == 0.0 && antisymmetric(sigma.values);
  const NodePlan plan = plan_nodes(quad, pairing);
  const int nrep = static_cast<int>(plan.rep.size());

  const CVector& w = g.weights;
  CMatrix s;
  if (!sigma_zero) s = w.asDiagonal() * sigma.values * w.asDiagonal();

  LatticeResult out;
  out.density.resize(nrep, g.n_t);
  const int nthreads = std::min(resolve_threads(opts.threads), std::max(1, nrep));
  std::vector<CMatrix> acc(nthreads, CMatrix::Zero(n, n));
  std::vector<std::string> errors(nthreads);

  auto work = [&](int tid) {
    CMatrix g0, m, x;
    BareFactors bf;
    Eigen::PartialPivLU<CMatrix> lu;
    const int lo = static_cast<int>(static_cast<long>(nrep) * tid / nthreads);
    const int hi = static_cast<int>(static_cast<long>(nrep) * (tid + 1) / nthreads);
    for (int r = lo; r < hi; ++r) {
      const int k = plan.rep[r];
      fill_bare_gk(g0, quad.eps[k], quad.epsb[k], g, fp, ts.mu, &bf);
      if (sigma_zero) {
        x = g0;
      } else {
        bare_left_multiply(m, g0, bf, g, s);
        m *= -1.0;
        m.diagonal().array() += 1.0;
        lu.compute(m);
        // Cheap pivot screen; the full estimate only when it looks doubtful.
        const auto piv = lu.matrixLU().diagonal().cwiseAbs();
        const double ratio = piv.minCoeff() / piv.maxCoeff();
        const double rc = ratio > 1e-6 ? 1.0 : lu.rcond();
        if (!(rc > 1e-14)) {
          std::ostringstream os;
          os << "lattice_sum: node " << k << " (eps=" << quad.eps[k] << ", eps_bar=" << quad.epsb[k]
             << ") is singular (condition estimate " << 1.0 / rc << ")";
          errors[tid] = os.str();
          return;
        }
        x = lu.solve(g0);
      }
      const double wk = quad.weight[k];
      if (plan.paired[r])
        acc[tid] += wk * (x - x.transpose());
      else
        acc[tid] += wk * x;
      for (int i = 0; i < g.n_t; ++i) out.density(r, i) = (-I_unit * x(g.fwd(i), g.bwd(i))).real();
    }
  };

  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw SingularKernel(e, 0.0);
  for (int t = 1; t < nthreads; ++t) acc[0] += acc[t];

  out.g_loc = ContourKernel(gp, std::move(acc[0]));
  out.nodes.order = quad.order;
  for (int r = 0; r < nrep; ++r) {
    const int k = plan.rep[r];
    out.nodes.eps.push_back(quad.eps[k]);
    out.nodes.epsb.push_back(quad.epsb[k]);
    out.nodes.weight.push_back(quad.weight[k]);
  }
  out.paired = plan.paired;
  return out;
}

ContourKernel lattice_sum(const ContourKernel& sigma, const QuadratureGrid& quad, const FieldProtocol& fp,
                          const ThermalState& ts) {
  return lattice_sum_full(sigma, quad, fp, ts).g_loc;
}

ContourKernel impurity_green(const ContourKernel& g0_eff, double U, double w1) {
  if (w1 < 0 || w1 > 1) throw ConfigError("impurity_green: w1 must lie in [0, 1]");
  if (U == 0.0 || w1 == 0.0) return g0_eff;
  const CVector& w = g0_eff.grid->weights;
  CMatrix shifted;
  try {
    shifted = solve_second_kind(-U * (g0_eff.values * w.asDiagonal()), g0_eff.values, "impurity_green");
  } catch (const SingularKernel& e) {
    throw SingularKernel(std::string("U-shifted operator (g0^-1 - U): ") + e.what(), e.condition());
  }
  return ContourKernel(g0_eff.grid, (1.0 - w1) * g0_eff.values + w1 * shifted);
}

TransientSolution scf_solve(const ModelParams& params, const GridPtr& grid, const QuadratureGrid& quad,
                            const ScfOptions& opts) {
  if (!(opts.tol > 0)) throw ConfigError("scf: tol must be positive");
  if (!(opts.mixing > 0 && opts.mixing <= 1)) throw ConfigError("scf: mixing must lie in (0, 1]");
  if (opts.max_iter < 1) throw ConfigError("scf: max_iter must be at least 1");
  if (params.w1 < 0 || params.w1 > 1) throw ConfigError("scf: w1 must lie in [0, 1]");

  const ThermalState ts = params.lattice_thermal();
  const bool ph = params.particle_hole();
  const double a = params.U * params.w1, b = params.U * (1.0 - params.w1), w1 = params.w1;
  const CVector& w = grid->weights;
  const int n = grid->size();

  QuadratureGrid nodes = params.fp.active_within(grid->t_max) ? quad : merge_by_energy(quad);

  TransientSolution sol;
  sol.grid = grid;
  sol.params = params;
  sol.sigma = opts.initial_sigma ? *opts.initial_sigma : ContourKernel::zero(grid);
  if (!sol.sigma.grid->same_as(*grid)) throw ConfigError("scf: initial sigma lives on a different grid");
  sol.sigma.grid = grid;
  double mixing = opts.mixing;
  int rises = 0;

  LatticeOptions lo;
  lo.threads = opts.threads;
  for (int it = 1; it <= opts.max_iter; ++it) {
    LatticeResult lat = lattice_sum_full(sol.sigma, nodes, params.fp, ts, lo);
    const CMatrix s = w.asDiagonal() * sol.sigma.values * w.asDiagonal();
    CMatrix ghat = solve_second_kind(lat.g_loc.values * s, lat.g_loc.values, "effective medium");
    CMatrix k1 = a == 0.0 ? ghat : solve_second_kind(a * (ghat * w.asDiagonal()), ghat, "empty-site propagator");
    CMatrix k2 = b == 0.0 ? ghat : solve_second_kind(-b * (ghat * w.asDiagonal()), ghat, "occupied-site propagator");
    CMatrix tmat = (1.0 - w1) * a * a * k1 + w1 * b * b * k2;
    CMatrix snew;
    if (tmat.cwiseAbs().maxCoeff() == 0.0) {
      snew = CMatrix::Zero(n, n);
    } else {
      const CMatrix wgw = w.asDiagonal() * ghat * w.asDiagonal();
      snew = solve_second_kind(tmat * wgw, tmat, "self-energy closure");
    }
    if (ph) snew = 0.5 * (snew - snew.transpose()).eval();
    const double d = (snew - sol.sigma.values).cwiseAbs().maxCoeff();
    sol.residual_history.push_back(d);

    const bool converged = d < opts.tol || opts.evaluate_only;
    if (!opts.evaluate_only) sol.sigma.values = converged ? snew : ((1.0 - mixing) * sol.sigma.values + mixing * snew).eval();
    sol.iterations = it;
    sol.g_loc = lat.g_loc;
    sol.g_hat = ContourKernel(grid, std::move(ghat));
    sol.g0_eff = ContourKernel(grid, k1);
    sol.g_imp = ContourKernel(grid, (1.0 - w1) * k1 + w1 * k2);
    sol.nodes = std::move(lat.nodes);
    sol.paired = std::move(lat.paired);
    sol.density = std::move(lat.density);
    sol.mixing_used = mixing;
    if (opts.on_iteration) opts.on_iteration(it, sol.sigma, d);
    if (converged) {
      sol.impurity_residual = (sol.g_imp.values - sol.g_loc.values).cwiseAbs().maxCoeff();
      return sol;
    }
    const std::size_t h = sol.residual_history.size();
    if (opts.oscillation_fallback && h >= 2 && sol.residual_history[h - 1] > sol.residual_history[h - 2]) {
      if (++rises >= 2 && mixing > 0.5) {
        mixing = 0.5;
        rises = 0;
      }
    }
  }
  std::ostringstream os;
  os << "scf: no convergence after " << opts.max_iter << " iterations (last residual "
     << sol.residual_history.back() << ")";
  throw ConvergenceError(os.str(), sol.residual_history);
}

ContourKernel hybridization(const TransientSolution& sol) {
  const ContourKernel g = bare_isolated_level(sol.grid, sol.params.mu, 0.0);
  const ContourKernel gi = invert(g);
  const ContourKernel mi = invert(sol.g0_eff);
  return ContourKernel(sol.grid, gi.values - mi.values);
}

LangrethParts langreth_parts(const ContourKernel& k) {
  const ComponentSet c = extract_components(k);
  const ContourGrid& g = *k.grid;
  LangrethParts p{c.lesser, c.greater, c.retarded, c.advanced, c.mixed_right, c.mixed_left, c.matsubara, {}, {}};
  p.t_diag.resize(g.n_t);
  p.a_diag.resize(g.n_t);
  for (int i = 0; i < g.n_t; ++i) {
    p.t_diag[i] = k.values(g.fwd(i), g.fwd(i));
    p.a_diag[i] = k.values(g.bwd(i), g.bwd(i));
  }
  return p;
}

LangrethParts langreth_product(const LangrethParts& a, const LangrethParts& b, const ContourGrid& g) {
  const int nt = g.n_t, nm = g.n_tau;
  RVector wt(nt);
  for (int i = 0; i < nt; ++i) wt[i] = g.weights[g.fwd(i)].real();
  CVector wm = g.weights.tail(nm);

  // A^R(i,k) w_k with the equal-time entry taken from the forward-branch jump.
  CMatrix rw = a.retarded * wt.asDiagonal();
  CMatrix aw = wt.asDiagonal() * b.advanced;
  for (int i = 0; i < nt; ++i) {
    rw(i, i) = (a.t_diag[i] - a.lesser(i, i)) * wt[i];
    aw(i, i) = (b.lesser(i, i) - b.a_diag[i]) * wt[i];
  }

  LangrethParts c;
  const CMatrix mix = a.mixed_right * wm.asDiagonal() * b.mixed_left;
  c.lesser = rw * b.lesser + a.lesser * aw + mix;
  c.greater = rw * b.greater + a.greater * aw + mix;
  c.retarded = CMatrix::Zero(nt, nt);
  c.advanced = CMatrix::Zero(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j <= i; ++j) {
      c.retarded(i, j) = c.greater(i, j) - c.lesser(i, j);
      c.advanced(j, i) = c.lesser(j, i) - c.greater(j, i);
    }
  c.mixed_right = rw * b.mixed_right + a.mixed_right * wm.asDiagonal() * b.matsubara;
  c.mixed_left = a.mixed_left * aw + a.matsubara * wm.asDiagonal() * b.mixed_left;
  c.matsubara = a.matsubara * wm.asDiagonal() * b.matsubara;

  // Equal-time values of the product on each real branch.
  c.t_diag.resize(nt);
  c.a_diag.resize(nt);
  for (int i = 0; i < nt; ++i) {
    cplx to = 0.0, ao = 0.0;
    for (int m = 0; m < nt; ++m) {
      const cplx at = m < i ? a.greater(i, m) : (m > i ? a.lesser(i, m) : a.t_diag[i]);
      const cplx bt = m > i ? b.greater(m, i) : (m < i ? b.lesser(m, i) : b.t_diag[i]);
      const cplx aa = m < i ? a.lesser(i, m) : (m > i ? a.greater(i, m) : a.a_diag[i]);
      const cplx ba = m > i ? b.lesser(m, i) : (m < i ? b.greater(m, i) : b.a_diag[i]);
      to += wt[m] * (at * bt - a.lesser(i, m) * b.greater(m, i));
      ao += wt[m] * (a.greater(i, m) * b.lesser(m, i) - aa * ba);
    }
    const cplx spur = (a.mixed_right.row(i) * wm.asDiagonal() * b.mixed_left.col(i)).value();
    c.t_diag[i] = to + spur;
    c.a_diag[i] = ao + spur;
  }
  return c;
}

double langreth_lesser_residual(const ContourKernel& g_medium, const ContourKernel& sigma, const ContourKernel& g,
                                bool continuum_diagonal) {
  const ContourGrid& grid = *g.grid;
  const LangrethParts gm = langreth_parts(g_medium), s = langreth_parts(sigma), gg = langreth_parts(g);
  LangrethParts sg = langreth_product(s, gg, grid);
  if (continuum_diagonal) {
    const CVector avg = 0.5 * (sg.lesser.diagonal() + sg.greater.diagonal());
    sg.t_diag = avg;
    sg.a_diag = avg;
  }
  const LangrethParts full = langreth_product(gm, sg, grid);
  return (gg.lesser - gm.lesser - full.lesser).cwiseAbs().maxCoeff();
}

CommonLattice common_lattice(const std::array<double, 3>& dts, double t_min, double t_max) {
  for (double d : dts)
    if (!(d > 0)) throw ConfigError("extrapolation: time steps must be positive");
  if (dts[0] == dts[1] || dts[1] == dts[2] || dts[0] == dts[2])
    throw ConfigError("extrapolation: the three time steps must differ");
  const double span = t_max - t_min;
  auto integral = [](double x) { return std::abs(x - std::round(x)) <= 1e-7 * std::max(1.0, std::abs(x)); };
  for (int m = 1; m <= 100000; ++m) {
    const double step = m * dts[0];
    if (step > span * (1 + 1e-12)) break;
    if (!integral(step / dts[1]) || !integral(step / dts[2]) || !integral(span / step)) continue;
    CommonLattice c;
    c.step = step;
    c.n = static_cast<int>(std::round(span / step)) + 1;
    for (int i = 0; i < 3; ++i) c.stride[i] = static_cast<int>(std::round(step / dts[i]));
    return c;
  }
  throw ConfigError("extrapolation: time steps are not commensurate on [t_min, t_max]");
}

std::array<double, 3> richardson_weights(const std::array<double, 3>& h) {
  std::array<double, 3> c{};
  for (int i = 0; i < 3; ++i) {
    double p = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) p *= h[j] / (h[j] - h[i]);
    c[i] = p;
  }
  return c;
}

RVector extrapolate_series(const std::array<RVector, 3>& series, const std::array<double, 3>& dts, double t_min,
                           double t_max) {
  const CommonLattice c = common_lattice(dts, t_min, t_max);
  const auto wts = richardson_weights(dts);
  RVector out = RVector::Zero(c.n);
  for (int r = 0; r < 3; ++r) {
    if ((series[r].size() - 1) != static_cast<long>(c.n - 1) * c.stride[r])
      throw ConfigError("extrapolation: series length does not match its time step");
    for (int i = 0; i < c.n; ++i) out[i] += wts[r] * series[r][static_cast<long>(i) * c.stride[r]];
  }
  return out;
}

CMatrix extrapolate_table(const std::array<CMatrix, 3>& tables, const std::array<double, 3>& dts, double t_min,
                          double t_max) {
  const CommonLattice c = common_lattice(dts, t_min, t_max);
  const auto wts = richardson_weights(dts);
  CMatrix out = CMatrix::Zero(c.n, c.n);
  for (int r = 0; r < 3; ++r) {
    if ((tables[r].rows() - 1) != static_cast<long>(c.n - 1) * c.stride[r])
      throw ConfigError("extrapolation: table size does not match its time step");
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        out(i, j) += wts[r] * tables[r](static_cast<long>(i) * c.stride[r], static_cast<long>(j) * c.stride[r]);
  }
  return out;
}

ExtrapolatedTables extrapolate_dt(const std::array<const TransientSolution*, 3>& runs) {
  const ContourGrid& g0 = *runs[0]->grid;
  const ModelParams& p0 = runs[0]->params;
  std::array<double, 3> dts{};
  for (int r = 0; r < 3; ++r) {
    const ContourGrid& g = *runs[r]->grid;
    const ModelParams& p = runs[r]->params;
    if (g.t_min != g0.t_min || g.t_max != g0.t_max || g.beta != g0.beta)
      throw ConfigError("extrapolation: runs cover different contours");
    if (p.U != p0.U || p.w1 != p0.w1 || p.mu != p0.mu || p.T != p0.T || p.fp.E != p0.fp.E || p.fp.t_on != p0.fp.t_on)
      throw ConfigError("extrapolation: runs use different model parameters");
    dts[r] = g.dt;
  }
  std::array<CMatrix, 3> gl, gr, sl, sr;
  for (int r = 0; r < 3; ++r) {
    const ComponentSet cg = extract_components(runs[r]->g_loc);
    const ComponentSet cs = extract_components(runs[r]->sigma);
    gl[r] = cg.lesser;
    gr[r] = cg.retarded;
    sl[r] = cs.lesser;
    sr[r] = cs.retarded;
  }
  ExtrapolatedTables out;
  out.t_min = g0.t_min;
  out.step = common_lattice(dts, g0.t_min, g0.t_max).step;
  out.g_lesser = extrapolate_table(gl, dts, g0.t_min, g0.t_max);
  out.g_retarded = extrapolate_table(gr, dts, g0.t_min, g0.t_max);
  out.sigma_lesser = extrapolate_table(sl, dts, g0.t_min, g0.t_max);
  out.sigma_retarded = extrapolate_table(sr, dts, g0.t_min, g0.t_max);
  return out;
}

}  // namespace nefk
