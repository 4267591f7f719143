#include "nefk/wigner.hpp"

#include <cmath>

#include "nefk/propagators.hpp"

namespace nefk {

double WignerSlice::unmasked_extent() const {
  double ext = INFINITY;
  for (int k = 0; k < t_rel.size(); ++k)
    if (field_mix[k]) ext = std::min(ext, std::abs(t_rel[k]));
  if (std::isinf(ext)) return t_rel.size() ? t_rel.cwiseAbs().maxCoeff() : 0.0;
  double best = -1.0;
  for (int k = 0; k < t_rel.size(); ++k)
    if (std::abs(t_rel[k]) < ext) best = std::max(best, std::abs(t_rel[k]));
  return best;
}

int WignerField::index_of(double t_ave) const {
  const double s = 2.0 * (t_ave - t_min) / dt;
  const int k = static_cast<int>(std::lround(s));
  if (std::abs(s - k) > 1e-6 || k < 0 || k >= static_cast<int>(slices.size()))
    throw ConfigError("wigner: t_ave " + std::to_string(t_ave) + " is not on the average-time sweep");
  return k;
}

const WignerSlice& WignerField::at(double t_ave) const { return slices[index_of(t_ave)]; }

WignerField to_wigner(const CMatrix& table, double t_min, double dt, double t_on) {
  WignerField f;
  f.t_min = t_min;
  f.dt = dt;
  f.t_on = t_on;
  f.n_t = static_cast<int>(table.rows());
  const int nt = f.n_t;
  f.slices.resize(2 * nt - 1);
  for (int s = 0; s < 2 * nt - 1; ++s) {
    WignerSlice& sl = f.slices[s];
    sl.s = s;
    sl.t_ave = t_min + 0.5 * s * dt;
    const int jhi = std::min(s, nt - 1), jlo = std::max(0, s - nt + 1);
    const int m = jhi - jlo + 1;
    sl.t_rel.resize(m);
    sl.values.resize(m);
    sl.field_mix.resize(m);
    sl.i_index.resize(m);
    // ascending t_rel = (i - j) dt means descending j
    for (int k = 0; k < m; ++k) {
      const int j = jhi - k, i = s - j;
      const double t = t_min + i * dt, tp = t_min + j * dt;
      sl.t_rel[k] = (i - j) * dt;
      sl.values[k] = table(i, j);
      sl.field_mix[k] = (t < t_on) != (tp < t_on);
      sl.i_index[k] = i;
    }
  }
  return f;
}

CMatrix from_wigner(const WignerField& field) {
  CMatrix t(field.n_t, field.n_t);
  for (const auto& sl : field.slices)
    for (int k = 0; k < sl.values.size(); ++k) t(sl.i_index[k], sl.s - sl.i_index[k]) = sl.values[k];
  return t;
}

namespace {
double taper(double x, double len, double frac) {
  if (frac <= 0 || len <= 0) return 1.0;
  const double start = (1.0 - frac) * len;
  if (x <= start) return 1.0;
  if (x >= len) return 0.0;
  return 0.5 * (1.0 + std::cos(M_PI * (x - start) / (len - start)));
}
}  // namespace

CVector wigner_to_frequency(const WignerSlice& slice, const RVector& omega, Sidedness side, const WindowPolicy& window) {
  const int m = static_cast<int>(slice.t_rel.size());
  if (m == 0) throw ConfigError("wigner_to_frequency: empty slice");
  double len = window.max_t_rel >= 0 ? window.max_t_rel : slice.t_rel.cwiseAbs().maxCoeff();
  std::vector<double> t;
  std::vector<cplx> c;
  double tmin_kept = INFINITY, tmax_kept = -INFINITY;
  for (int k = 0; k < m; ++k) {
    const double tr = slice.t_rel[k];
    if (std::abs(tr) > len + 1e-12) continue;
    if (side == Sidedness::one_sided && tr < -1e-12) continue;
    t.push_back(tr);
    c.push_back(slice.values[k] * taper(std::abs(tr), len, window.taper_fraction));
    tmin_kept = std::min(tmin_kept, tr);
    tmax_kept = std::max(tmax_kept, tr);
  }
  if (t.empty()) throw ConfigError("wigner_to_frequency: window leaves no samples");
  const double h = t.size() > 1 ? t[1] - t[0] : 1.0;
  CVector out = CVector::Zero(omega.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double wt = (k == 0 || k + 1 == t.size()) ? 0.5 * h : h;
    for (int q = 0; q < omega.size(); ++q) out[q] += wt * c[k] * std::exp(I_unit * (omega[q] * t[k]));
  }
  return out;
}

RVector padded_frequency_grid(const WignerSlice& slice, int pad, double omega_max) {
  if (pad < 1) throw ConfigError("padded_frequency_grid: pad must be >= 1");
  const int m = static_cast<int>(slice.t_rel.size());
  const double h = m > 1 ? slice.t_rel[1] - slice.t_rel[0] : 1.0;
  const int n = pad * m;
  const double dw = 2.0 * M_PI / (n * h);
  std::vector<double> w;
  for (int k = -n / 2; k <= n / 2; ++k)
    if (std::abs(k * dw) <= omega_max) w.push_back(k * dw);
  return Eigen::Map<RVector>(w.data(), static_cast<long>(w.size()));
}

double check_ph_relation(const CMatrix& gr, const CMatrix& gl) {
  double dev = 0.0;
  for (int i = 0; i < gr.rows(); ++i)
    for (int j = 0; j <= i; ++j) dev = std::max(dev, std::abs(gr(i, j) - (std::conj(gl(i, j)) - gl(i, j))));
  return dev;
}

FdtDeviation check_fdt(const CVector& sr, const CVector& sl, const RVector& omega, double beta) {
  FdtDeviation d;
  const double scale = sr.imag().cwiseAbs().maxCoeff();
  if (scale == 0.0) return d;
  double sw = 0.0, s2 = 0.0;
  for (int k = 0; k < omega.size(); ++k) {
    const double wgt = std::abs(sr[k].imag()) / scale;
    const cplx ref = -2.0 * I_unit * fermi_beta(omega[k], beta) * sr[k].imag();
    const double e = std::abs(sl[k] - ref) / scale;
    d.linf = std::max(d.linf, wgt * e);
    s2 += wgt * e * e;
    sw += wgt;
  }
  d.l2 = std::sqrt(s2 / sw);
  return d;
}

}  // namespace nefk
