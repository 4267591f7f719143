#include "nefk/bridge.hpp"

#include <fftw3.h>

#include <cmath>
#include <sstream>

namespace nefk {

double BetaFit::operator()(double t) const {
  return beta0 * std::exp(-gamma * (t - t_ref)) + beta1 * std::exp(-gamma1 * (t - t_ref));
}

std::string BetaFit::describe() const {
  std::ostringstream os;
  os << family << " beta0=" << beta0 << " gamma=" << gamma;
  if (family == "exp2") os << " beta1=" << beta1 << " gamma1=" << gamma1;
  os << " t_ref=" << t_ref << " rms=" << rms_rel;
  return os.str();
}

namespace {

double relative_rms(const BetaFit& f, const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = (f(t[i]) - y[i]) / y[i];
    s += r * r;
  }
  return std::sqrt(s / t.size());
}

// Non-negative amplitudes for fixed rates, minimizing the relative residual.
double project_amplitudes(double g0, double g1, const std::vector<double>& t, const std::vector<double>& y,
                          BetaFit& f) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = std::exp(-g0 * (t[i] - f.t_ref)) / y[i];
    a(i, 1) = std::exp(-g1 * (t[i] - f.t_ref)) / y[i];
  }
  Eigen::Vector2d c = a.colPivHouseholderQr().solve(rhs);
  if (!(c[0] >= 0 && c[1] >= 0)) {
    double best = INFINITY;
    for (int k = 0; k < 2; ++k) {
      const double ck = std::max(0.0, a.col(k).dot(rhs) / a.col(k).squaredNorm());
      const double r = (a.col(k) * ck - rhs).squaredNorm();
      if (r < best) {
        best = r;
        c = Eigen::Vector2d::Zero();
        c[k] = ck;
      }
    }
  }
  f.gamma = g0;
  f.gamma1 = g1;
  f.beta0 = c[0];
  f.beta1 = c[1];
  return (a * c - rhs).squaredNorm();
}

BetaFit fit_double(const std::vector<double>& t, const std::vector<double>& y, BetaFit f) {
  f.family = "exp2";
  const int ng = 48;
  const double lo = std::log(1e-3), hi = std::log(10.0), h = (hi - lo) / (ng - 1);
  double best = INFINITY, l0 = 0.0, l1 = 0.0;
  BetaFit trial = f;
  for (int i = 0; i < ng; ++i)
    for (int j = i + 1; j < ng; ++j) {
      const double r = project_amplitudes(std::exp(lo + i * h), std::exp(lo + j * h), t, y, trial);
      if (r < best) {
        best = r;
        l0 = lo + i * h;
        l1 = lo + j * h;
      }
    }
  // Compass search in log-rates.
  for (double step = h; step > 1e-10; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      const double cand[4][2] = {{l0 + step, l1}, {l0 - step, l1}, {l0, l1 + step}, {l0, l1 - step}};
      for (const auto& c : cand) {
        if (!(c[0] < c[1])) continue;
        const double r = project_amplitudes(std::exp(c[0]), std::exp(c[1]), t, y, trial);
        if (r < best * (1 - 1e-14)) {
          best = r;
          l0 = c[0];
          l1 = c[1];
          moved = true;
        }
      }
    }
  }
  project_amplitudes(std::exp(l0), std::exp(l1), t, y, f);
  if (f.beta0 == 0.0) {
    std::swap(f.beta0, f.beta1);
    std::swap(f.gamma, f.gamma1);
  }
  if (f.beta1 == 0.0) {
    f.family = "exp";
    f.gamma1 = 0.0;
  }
  f.rms_rel = relative_rms(f, t, y);
  return f;
}

}  // namespace

BetaFit fit_beta(const Trajectory& traj, double t_fit_start, double max_rms, const std::string& family) {
  if (family != "exp" && family != "exp2" && family != "auto")
    throw ConfigError("fit_beta: family must be exp, exp2 or auto");
  std::vector<double> t, y;
  for (int i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= t_fit_start - 1e-12) {
      if (!(traj.values[i] > 0))
        throw ConfigError("fit_beta: beta must be positive in the fit window (saturated samples present)");
      t.push_back(traj.times[i]);
      y.push_back(traj.values[i]);
    }
  if (t.size() < 10) throw ConfigError("fit_beta: fewer than 10 samples beyond t_fit_start");
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[i - 1] * (1 + 1e-12)) {
      std::ostringstream os;
      os << "fit_beta: beta increases at t = " << t[i] << "; choose a later t_fit_start";
      throw ConfigError(os.str());
    }
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = -(t[i] - t.front());
    rhs[i] = std::log(y[i]);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(rhs);
  BetaFit f;
  f.beta0 = std::exp(c[0]);
  f.gamma = c[1];
  f.t_ref = t.front();
  f.t_start = t.front();
  f.t_end = t.back();
  f.samples = n;
  f.rms_rel = relative_rms(f, t, y);
  if (!(f.gamma > 1e-10)) throw ConfigError("fit_beta: no decay of beta (gamma <= 0), system is not thermalizing");
  if (family == "exp2" || (family == "auto" && f.rms_rel > max_rms)) f = fit_double(t, y, f);
  if (f.rms_rel > max_rms) {
    std::ostringstream os;
    os << "fit_beta: relative RMS residual " << f.rms_rel << " of family " << f.family << " exceeds " << max_rms;
    throw ConfigError(os.str());
  }
  return f;
}

SteadySigma steady_retarded_sigma(const CMatrix& sr_table, double t_min, double dt, double t_on, double t_lo,
                                  double t_hi, const RVector& omega_check, double max_spread) {
  const WignerField wf = to_wigner(sr_table, t_min, dt, t_on);
  std::vector<const WignerSlice*> chosen;
  for (const auto& sl : wf.slices)
    if (sl.t_ave >= t_lo - 1e-9 && sl.t_ave <= t_hi + 1e-9) chosen.push_back(&sl);
  if (chosen.empty()) throw ConfigError("steady_retarded_sigma: window contains no average times");
  double extent = INFINITY;
  for (const auto* sl : chosen) {
    double e = -1.0;
    for (int k = 0; k < sl->t_rel.size(); ++k) {
      if (sl->t_rel[k] < -1e-12) continue;
      if (sl->field_mix[k]) break;
      e = sl->t_rel[k];
    }
    extent = std::min(extent, e);
  }
  if (!(extent > 0)) throw ConfigError("steady_retarded_sigma: window has no unmasked retarded samples");

  SteadySigma out;
  out.dt = dt;
  out.extent = extent;
  out.slices = static_cast<int>(chosen.size());
  bool even = false, odd = false;
  for (const auto* sl : chosen) (sl->s % 2 ? odd : even) = true;
  out.dense = even && odd;
  const double spacing = out.dense ? dt : 2 * dt;
  const double offset = (!out.dense && odd) ? dt : 0.0;
  const int m = static_cast<int>(std::floor((extent - offset) / spacing + 1e-9)) + 1;
  out.t_rel.resize(m);
  out.values = CVector::Zero(m);
  std::vector<int> count(m, 0);
  for (int k = 0; k < m; ++k) out.t_rel[k] = offset + k * spacing;
  for (const auto* sl : chosen)
    for (int k = 0; k < sl->t_rel.size(); ++k) {
      const double tr = sl->t_rel[k];
      if (tr < -1e-12 || tr > extent + 1e-9) continue;
      const int idx = static_cast<int>(std::lround((tr - offset) / spacing));
      out.values[idx] += sl->values[k];
      ++count[idx];
    }
  for (int k = 0; k < m; ++k) {
    if (count[k] == 0) throw ConfigError("steady_retarded_sigma: incomplete relative-time coverage");
    out.values[k] /= count[k];
  }

  // Spread of the even-parity slice spectra about their mean.
  WindowPolicy win;
  win.max_t_rel = extent;
  std::vector<CVector> spectra;
  for (const auto* sl : chosen)
    if (sl->s % 2 == 0) spectra.push_back(wigner_to_frequency(*sl, omega_check, Sidedness::one_sided, win));
  if (spectra.size() > 1) {
    CVector mean = CVector::Zero(omega_check.size());
    for (const auto& s : spectra) mean += s;
    mean /= static_cast<double>(spectra.size());
    for (const auto& s : spectra) out.spread = std::max(out.spread, (s - mean).cwiseAbs().maxCoeff());
  }
  if (out.spread > max_spread) {
    std::ostringstream os;
    os << "steady_retarded_sigma: slice spread " << out.spread << " exceeds " << max_spread
       << "; the retarded self-energy is not yet stationary (raise t_max or move the window)";
    throw ConfigError(os.str());
  }
  return out;
}

CVector steady_spectrum(const SteadySigma& sr, const RVector& omega, const WindowPolicy& window) {
  WignerSlice sl;
  sl.t_rel = sr.t_rel;
  sl.values = sr.values;
  sl.field_mix.assign(sr.t_rel.size(), 0);
  WindowPolicy w = window;
  if (w.max_t_rel < 0) w.max_t_rel = sr.extent;
  return wigner_to_frequency(sl, omega, Sidedness::one_sided, w);
}

CVector fdt_lesser_spectrum(const CVector& sr, const RVector& omega, double beta) {
  CVector out(omega.size());
  for (int k = 0; k < omega.size(); ++k) out[k] = -2.0 * I_unit * fermi_beta(omega[k], beta) * sr[k].imag();
  return out;
}

namespace {

// Spectral function S(t) = Sigma^> - Sigma^< on t = k dt, |k| <= K, tapered.
std::vector<cplx> spectral_samples(const SteadySigma& sr, int& kmax) {
  if (!sr.dense) throw ConfigError("FDT extension: steady proxy needs both t_ave parities (window of >= 2 slices)");
  kmax = static_cast<int>(sr.values.size()) - 1;
  std::vector<cplx> s(2 * kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const double tap = [&] {
      const double x = sr.t_rel[k], len = sr.extent, start = 0.9 * len;
      if (x <= start) return 1.0;
      return 0.5 * (1.0 + std::cos(M_PI * (x - start) / (len - start)));
    }();
    cplx v = sr.values[k] * tap;
    if (k == 0) v = cplx(0.0, v.imag());
    s[kmax + k] = v;
    s[kmax - k] = -std::conj(v);
  }
  return s;
}

class FdtTransformer {
public:
  FdtTransformer(const SteadySigma& sr, int n_rel) : dt_(sr.dt) {
    const std::vector<cplx> s = spectral_samples(sr, kmax_);
    p_ = 1;
    while (p_ < 2 * (std::max(kmax_, n_rel) + 1) + 4 * kmax_) p_ <<= 1;
    buf_ = fftw_alloc_complex(p_);
    spec_ = fftw_alloc_complex(p_);
    fwd_ = fftw_plan_dft_1d(p_, buf_, spec_, FFTW_BACKWARD, FFTW_ESTIMATE);  // exp(+i w t)
    inv_ = fftw_plan_dft_1d(p_, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);    // exp(-i w t)
    for (int i = 0; i < p_; ++i) buf_[i][0] = buf_[i][1] = 0.0;
    for (int k = -kmax_; k <= kmax_; ++k) {
      const int idx = (k + p_) % p_;
      buf_[idx][0] = s[kmax_ + k].real();
      buf_[idx][1] = s[kmax_ + k].imag();
    }
    fftw_execute(fwd_);
    omega_.resize(p_);
    for (int m = 0; m < p_; ++m) {
      const int mm = m < p_ / 2 ? m : m - p_;
      omega_[m] = 2.0 * M_PI * mm / (p_ * dt_);
    }
  }
  ~FdtTransformer() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(spec_);
  }
  FdtTransformer(const FdtTransformer&) = delete;
  FdtTransformer& operator=(const FdtTransformer&) = delete;

  // lesser(k dt) for k = -n_rel+1 .. n_rel-1, returned with offset n_rel-1.
  std::vector<cplx> lesser(double beta, int n_rel) {
    for (int m = 0; m < p_; ++m) {
      // S(w) = dt * sum_k S_k e^{i w t_k}; lesser(t) = -(1/(P dt)) sum_m e^{-i w t} f S(w)
      const double f = fermi_beta(omega_[m], beta);
      buf_[m][0] = -f * spec_[m][0] / p_;
      buf_[m][1] = -f * spec_[m][1] / p_;
    }
    fftw_execute(inv_);
    std::vector<cplx> out(2 * n_rel - 1);
    for (int k = -n_rel + 1; k < n_rel; ++k) {
      const int idx = (k + p_) % p_;
      out[n_rel - 1 + k] = cplx(buf_[idx][0], buf_[idx][1]);
    }
    return out;
  }

  int kmax() const { return kmax_; }

private:
  double dt_;
  int kmax_ = 0, p_ = 0;
  fftw_complex *buf_ = nullptr, *spec_ = nullptr;
  fftw_plan fwd_ = nullptr, inv_ = nullptr;
  std::vector<double> omega_;
};

}  // namespace

CVector fdt_lesser_time(const SteadySigma& sr, double beta, int n_rel) {
  FdtTransformer tr(sr, n_rel);
  const std::vector<cplx> l = tr.lesser(beta, n_rel);
  CVector out(n_rel);
  for (int k = 0; k < n_rel; ++k) out[k] = l[n_rel - 1 + k];
  return out;
}

ExtensionTable extend_sigma_lesser(const SteadySigma& sr, const BetaFit& fit, double t_min, double t_max_new) {
  if (!(fit.gamma > 0)) throw ConfigError("extend_sigma_lesser: fit is not decaying (gamma <= 0)");
  const double steps = (t_max_new - t_min) / sr.dt;
  const int nt = static_cast<int>(std::lround(steps)) + 1;
  if (std::abs(steps - (nt - 1)) > 1e-7 * std::max(1.0, steps))
    throw ConfigError("extend_sigma_lesser: t_max_new is not on the time grid");
  ExtensionTable ext;
  ext.t_min = t_min;
  ext.dt = sr.dt;
  ext.n_t = nt;
  ext.lesser.resize(nt, nt);
  ext.retarded = CMatrix::Zero(nt, nt);
  ext.beta_of_s.resize(2 * nt - 1);
  FdtTransformer tr(sr, nt);
  const int kmax = tr.kmax();
  for (int s = 0; s < 2 * nt - 1; ++s) {
    const double t_ave = t_min + 0.5 * s * sr.dt;
    const double beta = fit(t_ave);
    ext.beta_of_s[s] = beta;
    const std::vector<cplx> l = tr.lesser(beta, nt);
    const int jlo = std::max(0, s - nt + 1), jhi = std::min(s, nt - 1);
    for (int j = jlo; j <= jhi; ++j) {
      const int i = s - j;
      ext.lesser(i, j) = l[nt - 1 + (i - j)];
    }
  }
  // Same taper as the spectral samples so R and < stay consistent.
  for (int i = 0; i < nt; ++i)
    for (int j = std::max(0, i - kmax); j <= i; ++j) {
      const double x = (i - j) * sr.dt, len = sr.extent, start = 0.9 * len;
      const double tap = x > start ? 0.5 * (1.0 + std::cos(M_PI * (x - start) / (len - start))) : 1.0;
      ext.retarded(i, j) = sr.values[i - j] * tap;
    }
  return ext;
}

ExtendedSigma assemble_extended(const TransientSolution& sol, const ExtensionTable& ext, double t_patch,
                                double t_max_new, const BlendPolicy& blend, double mixed_threshold) {
  const ContourGrid& g = *sol.grid;
  if (std::abs(ext.dt - g.dt) > 1e-12 || ext.t_min != g.t_min)
    throw ConfigError("assemble_extended: extension grid does not match the transient grid");
  if (!(t_patch > g.t_min) || t_patch > g.t_max + 1e-12)
    throw ConfigError("assemble_extended: t_patch must lie inside the transient window");
  if (t_max_new < g.t_max - 1e-12) throw ConfigError("assemble_extended: t_max_new must not shorten the run");
  if (blend.width < 0) throw ConfigError("assemble_extended: blend width must be non-negative");
  GridPtr ng = build_contour(g.t_min, t_max_new, g.beta, g.dt, g.n_tau);
  if (ng->n_t != ext.n_t) throw ConfigError("assemble_extended: extension does not cover t_max_new");
  const int nt_old = g.n_t, nt = ng->n_t, nm = g.n_tau;
  const ComponentSet c = extract_components(sol.sigma);

  auto weight = [&](int i, int j) {
    if (i >= nt_old || j >= nt_old) return 0.0;
    const double t_ave = g.t_min + 0.5 * (i + j) * g.dt;
    if (t_ave > t_patch + 1e-9) return 0.0;
    if (blend.width <= 0 || t_ave <= t_patch - blend.width) return 1.0;
    return 0.5 * (1.0 + std::cos(M_PI * (t_ave - (t_patch - blend.width)) / blend.width));
  };

  CMatrix lesser(nt, nt), greater(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      const double lam = weight(i, j);
      const cplx tl = lam > 0 ? c.lesser(i, j) : cplx(0.0);
      lesser(i, j) = lam * tl + (1.0 - lam) * ext.lesser(i, j);
    }
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j <= i; ++j) {
      const double lam = weight(i, j);
      const cplx tr = lam > 0 ? c.retarded(i, j) : cplx(0.0);
      const cplx r = lam * tr + (1.0 - lam) * ext.retarded(i, j);
      greater(i, j) = lesser(i, j) + r;
    }
  for (int i = 0; i < nt; ++i)
    for (int j = i + 1; j < nt; ++j) greater(i, j) = -std::conj(greater(j, i));

  CMatrix mr = CMatrix::Zero(nt, nm), ml = CMatrix::Zero(nm, nt);
  double audit = 0.0;
  for (int i = 0; i < nt_old; ++i) {
    const double t = g.time(i);
    if (t <= t_patch + 1e-9) {
      mr.row(i) = c.mixed_right.row(i);
      ml.col(i) = c.mixed_left.col(i);
    }
    if (t >= t_patch - 1e-9)
      audit = std::max({audit, c.mixed_right.row(i).cwiseAbs().maxCoeff(), c.mixed_left.col(i).cwiseAbs().maxCoeff()});
  }
  if (audit > mixed_threshold) {
    std::ostringstream os;
    os << "assemble_extended: mixed-time self-energy at t_patch is " << audit << " (> " << mixed_threshold
       << "); t_patch lies inside the initial transient, move it later";
    throw PatchError(os.str());
  }

  ExtendedSigma out;
  out.kernel = assemble_from_components(ng, lesser, greater, c.matsubara, mr, ml);
  out.t_patch = t_patch;
  out.t_max_new = t_max_new;
  out.mixed_audit = audit;
  out.blend = blend;
  // Continuity at the patching line: relative L2 of extension vs transient lesser.
  const int s = static_cast<int>(std::lround(2.0 * (t_patch - g.t_min) / g.dt));
  double num = 0.0, den = 0.0;
  for (int j = std::max(0, s - nt_old + 1); j <= std::min(s, nt_old - 1); ++j) {
    const int i = s - j;
    num += std::norm(ext.lesser(i, j) - c.lesser(i, j));
    den += std::norm(c.lesser(i, j));
  }
  out.continuity = den > 0 ? std::sqrt(num / den) : 0.0;
  return out;
}

ExtendedObservables extended_observables(const ExtendedSigma& ext, const QuadratureGrid& quad,
                                         const ModelParams& params, int threads) {
  LatticeOptions lo;
  lo.threads = threads;
  ExtendedObservables out;
  out.lattice = lattice_sum_full(ext.kernel, quad, params.fp, params.lattice_thermal(), lo);
  out.current = current(out.lattice.nodes, out.lattice.paired, out.lattice.density, *ext.kernel.grid, params.fp);
  out.current.provenance = "extended";
  return out;
}

}  // namespace nefk
