#include "nefk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nefk/errors.hpp"
#include "nefk/io.hpp"

namespace nefk {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string path_in(const RunConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

std::string fixed(double x, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

std::vector<double> to_std(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

EqParams eq_params(const RunConfig& c, double U) {
  const ModelParams m = c.model_at(U);
  return EqParams{U, c.T, m.mu, c.w1, 1.0};
}

void note(const ProgressFn& fn, const std::string& msg) {
  if (fn) fn(msg);
}

}  // namespace

std::string run_tag(const RunConfig& c, int index) {
  std::ostringstream os;
  os << "run" << index << "_dt" << std::setprecision(6) << c.dt[index];
  return os.str();
}

CalibrationTable calibrate(const RunConfig& c) {
  const double b0 = 1.0 / c.T;
  static const double rel[] = {2.0, 1.0,  0.8,  0.6,  0.5,  0.4,  0.3,  0.25, 0.2,  0.15,
                               0.12, 0.1, 0.08, 0.06, 0.045, 0.03, 0.02, 0.01, 0.005};
  std::vector<double> T;
  for (double r : rel) T.push_back(1.0 / (r * b0));
  return energy_vs_temperature(eq_params(c, c.U), T);
}

EquilibriumArtifacts cmd_equilibrium(const RunConfig& c, bool write) {
  EquilibriumArtifacts out;
  if (write && !c.eq_U.empty()) ensure_directory(c.output_dir);
  const RVector omega = omega_grid(-c.eq_omega_max, c.eq_omega_max, c.eq_n_omega);
  CsvHeader h{c.hash(), "equilibrium", {}};
  for (double U : c.eq_U) {
    EqSolution sol;
    try {
      sol = eq_scf(eq_params(c, U), omega);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("equilibrium panel U=" + fixed(U) + ": " + e.what(), e.history());
    } catch (const std::exception& e) {
      throw std::runtime_error("equilibrium panel U=" + fixed(U) + ": " + e.what());
    }
    if (write) {
      const std::string f = path_in(c, "eq_sigma_U" + fixed(U) + ".csv");
      h.extra = {{"U", fixed(U, 6)}, {"T", fixed(c.T, 6)}};
      write_csv(f, h, {"omega", "re_sigma", "im_sigma", "dos"},
                {to_std(omega), to_std(sol.sigma_r.real()), to_std(sol.sigma_r.imag()), to_std(sol.dos)});
      out.files.push_back(f);
    }
    out.panels.push_back(std::move(sol));
  }
  if (write && !c.eq_U.empty()) {
    const CalibrationTable t = calibrate(c);
    const std::string f = path_in(c, "calibration.csv");
    CsvHeader hc{c.hash(), "equilibrium calibration", {{"U", fixed(c.U, 6)}}};
    std::vector<double> T(t.T);
    T[0] = std::numeric_limits<double>::infinity();
    write_csv(f, hc, {"beta", "T", "energy"}, {t.beta, T, t.energy});
    out.files.push_back(f);
  }
  return out;
}

std::shared_ptr<TransientSolution> solve_run(const RunConfig& c, int index, RunReport* report,
                                             const ProgressFn& progress) {
  const auto t0 = Clock::now();
  const double dt = c.dt[index];
  GridPtr grid = build_contour(c.t_min, c.t_max, 1.0 / c.T, dt, c.n_tau);
  const QuadratureGrid quad = gauss_hermite_joint(c.quad_order, c.quad_prune);
  const std::string ckdir = path_in(c, "checkpoints"), tag = run_tag(c, index);

  ScfOptions o;
  o.tol = c.scf_tol;
  o.max_iter = c.scf_max_iter;
  o.mixing = c.scf_mixing;
  o.threads = c.threads;
  bool resumed = false;
  double stored = 0.0;
  std::vector<double> history;
  if (c.checkpoint_every > 0) {
    ContourKernel sigma;
    Checkpoint meta;
    meta.config_hash = c.solver_hash();
    if (load_checkpoint(ckdir, tag, grid, sigma, meta)) {
      resumed = true;
      history = meta.residuals;
      stored = meta.seconds;
      o.initial_sigma = sigma;
      if (!history.empty() && history.back() < c.scf_tol) o.evaluate_only = true;
      note(progress, tag + ": resuming at iteration " + std::to_string(meta.iteration));
    }
    o.on_iteration = [&, base = meta.iteration](int it, const ContourKernel& s, double r) {
      history.push_back(r);
      note(progress, tag + ": iteration " + std::to_string(base + it) + " residual " + std::to_string(r));
      if ((base + it) % c.checkpoint_every == 0 || r < c.scf_tol)
        save_checkpoint(ckdir, tag, s, Checkpoint{base + it, history, c.solver_hash(), dt, stored + seconds_since(t0)});
    };
    if (o.evaluate_only) o.on_iteration = nullptr;
  } else {
    o.on_iteration = [&](int it, const ContourKernel&, double r) {
      note(progress, tag + ": iteration " + std::to_string(it) + " residual " + std::to_string(r));
    };
  }
  auto sol = std::make_shared<TransientSolution>(scf_solve(c.model(), grid, quad, o));
  if (o.evaluate_only) sol->residual_history = history;
  if (report) {
    report->dt = dt;
    report->wall = seconds_since(t0);
    report->seconds = o.evaluate_only ? stored : stored + report->wall;
    report->resumed = resumed;
  }
  return sol;
}

Trajectory beta_trajectory(const TransientSolution& sol, const CalibrationTable& table, double e_eq0) {
  const Trajectory j = current(sol);
  const Trajectory e = total_energy(j, sol.params.fp, e_eq0);
  return effective_beta(e, table);
}

std::vector<SpectralSlice> spectral_slices(const TransientSolution& sol, const RunConfig& c,
                                           const std::function<double(double)>& beta_at) {
  const ContourGrid& g = *sol.grid;
  const ComponentSet cs = extract_components(sol.sigma);
  const WignerField wr = to_wigner(cs.retarded, g.t_min, g.dt, c.t_on);
  const WignerField wl = to_wigner(cs.lesser, g.t_min, g.dt, c.t_on);
  const RVector omega = omega_grid(-c.omega_max, c.omega_max, c.n_omega);
  std::vector<SpectralSlice> out;
  const double first = g.t_min + 0.5 * c.min_extent;
  for (double ta = first; ta <= g.t_max + 1e-9; ta += c.slice_step) {
    const int s = static_cast<int>(std::lround(2.0 * (ta - g.t_min) / g.dt));
    if (s > 2 * g.n_t - 2) break;
    const WignerSlice& r = wr.slices[s];
    const WignerSlice& l = wl.slices[s];
    double extent = r.unmasked_extent();
    if (r.t_rel.size()) extent = std::min(extent, r.t_rel[r.t_rel.size() - 1]);
    if (extent < c.min_extent - 1e-9) continue;
    SpectralSlice sl;
    sl.t_ave = r.t_ave;
    sl.extent = extent;
    sl.beta = beta_at(r.t_ave);
    std::vector<double> tr;
    std::vector<cplx> vr, vl;
    for (int k = 0; k < r.t_rel.size(); ++k)
      if (r.t_rel[k] >= -1e-12 && r.t_rel[k] <= extent + 1e-9) {
        tr.push_back(r.t_rel[k]);
        vr.push_back(r.values[k]);
        vl.push_back(l.values[k]);
      }
    sl.t_rel = Eigen::Map<RVector>(tr.data(), static_cast<long>(tr.size()));
    sl.sr_time = Eigen::Map<CVector>(vr.data(), static_cast<long>(vr.size()));
    sl.sl_time = Eigen::Map<CVector>(vl.data(), static_cast<long>(vl.size()));
    WindowPolicy win;
    win.max_t_rel = extent;
    sl.omega = omega;
    sl.sr = wigner_to_frequency(r, omega, Sidedness::one_sided, win);
    sl.sl = wigner_to_frequency(l, omega, Sidedness::two_sided, win);
    sl.sl_fdt.resize(omega.size());
    for (int k = 0; k < omega.size(); ++k)
      sl.sl_fdt[k] = -2.0 * I_unit * fermi_beta(omega[k], sl.beta) * sl.sr[k].imag();
    out.push_back(std::move(sl));
  }
  return out;
}

namespace {

double interpolate(const Trajectory& tr, double t) {
  const RVector& x = tr.times;
  if (t <= x[0]) return tr.values[0];
  if (t >= x[x.size() - 1]) return tr.values[x.size() - 1];
  const double h = x[1] - x[0];
  const int i = std::min(static_cast<int>((t - x[0]) / h), static_cast<int>(x.size()) - 2);
  const double u = (t - x[i]) / h;
  return (1 - u) * tr.values[i] + u * tr.values[i + 1];
}

void write_slices(const RunConfig& c, const std::vector<SpectralSlice>& slices, const std::string& tag,
                  std::vector<std::string>& files) {
  std::vector<double> ta, tr, srr, sri, slr, sli;
  std::vector<double> wa, om, fr, fi, lr, li, fdt_i;
  for (const auto& s : slices) {
    for (int k = 0; k < s.t_rel.size(); ++k) {
      ta.push_back(s.t_ave);
      tr.push_back(s.t_rel[k]);
      srr.push_back(s.sr_time[k].real());
      sri.push_back(s.sr_time[k].imag());
      slr.push_back(s.sl_time[k].real());
      sli.push_back(s.sl_time[k].imag());
    }
    for (int k = 0; k < s.omega.size(); ++k) {
      wa.push_back(s.t_ave);
      om.push_back(s.omega[k]);
      fr.push_back(s.sr[k].real());
      fi.push_back(s.sr[k].imag());
      lr.push_back(s.sl[k].real());
      li.push_back(s.sl[k].imag());
      fdt_i.push_back(s.sl_fdt[k].imag());
    }
  }
  CsvHeader h{c.hash(), "transient " + tag, {}};
  std::string f = path_in(c, "sigma_time.csv");
  write_csv(f, h, {"t_ave", "t_rel", "re_sigma_r", "im_sigma_r", "re_sigma_l", "im_sigma_l"},
            {ta, tr, srr, sri, slr, sli});
  files.push_back(f);
  f = path_in(c, "sigma_spectra.csv");
  h.provenance = "transient " + tag + "; fdt column uses beta_eff(t_ave)";
  write_csv(f, h, {"t_ave", "omega", "re_sigma_r", "im_sigma_r", "re_sigma_l", "im_sigma_l", "im_sigma_l_fdt"},
            {wa, om, fr, fi, lr, li, fdt_i});
  files.push_back(f);
}

}  // namespace

TransientArtifacts cmd_transient(const RunConfig& c, bool write, const ProgressFn& progress) {
  TransientArtifacts out;
  if (write) ensure_directory(c.output_dir);
  std::string failures;
  for (int r = 0; r < 3; ++r) {
    try {
      out.runs[r] = solve_run(c, r, &out.reports[r], progress);
      out.current[r] = current(*out.runs[r]);
    } catch (const std::exception& e) {
      out.reports[r].dt = c.dt[r];
      out.reports[r].error = e.what();
      failures += run_tag(c, r) + ": " + e.what() + "\n";
      note(progress, run_tag(c, r) + " failed: " + e.what());
    }
  }
  CsvHeader h{c.hash(), "transient", {}};
  const ModelParams m = c.model();
  out.e_eq0 = equilibrium_energy(eq_params(c, c.U), c.T);

  int finest = -1;
  for (int r = 0; r < 3; ++r)
    if (out.runs[r]) {
      finest = r;
      if (!write) continue;
      const Trajectory e = total_energy(out.current[r], m.fp, out.e_eq0);
      const std::string f = path_in(c, run_tag(c, r) + "_current.csv");
      h.provenance = "transient " + run_tag(c, r);
      write_csv(f, h, {"t", "j", "e_tot"}, {to_std(out.current[r].times), to_std(out.current[r].values), to_std(e.values)});
      out.files.push_back(f);
      write_snapshot(path_in(c, run_tag(c, r) + "_sigma.snap"), out.runs[r]->sigma);
      write_snapshot(path_in(c, run_tag(c, r) + "_gloc.snap"), out.runs[r]->g_loc);
    }

  if (out.runs[0] && out.runs[1] && out.runs[2]) {
    const std::array<RVector, 3> js{out.current[0].values, out.current[1].values, out.current[2].values};
    out.j_extrap = extrapolate_series(js, c.dt, c.t_min, c.t_max);
    const CommonLattice lat = common_lattice(c.dt, c.t_min, c.t_max);
    out.common_t = RVector::LinSpaced(lat.n, c.t_min, c.t_min + (lat.n - 1) * lat.step);
    if (write) {
      std::array<std::vector<double>, 3> sub;
      for (int r = 0; r < 3; ++r)
        for (int i = 0; i < lat.n; ++i) sub[r].push_back(js[r][static_cast<long>(i) * lat.stride[r]]);
      const std::string f = path_in(c, "current_extrapolated.csv");
      h.provenance = "transient dt-extrapolated";
      write_csv(f, h, {"t", "j_dt0", "j_dt1", "j_dt2", "j_extrap"},
                {to_std(out.common_t), sub[0], sub[1], sub[2], to_std(out.j_extrap)});
      out.files.push_back(f);
    }
  }

  if (finest >= 0) {
    const CalibrationTable table = calibrate(c);
    const TransientSolution& sol = *out.runs[finest];
    out.e_tot = total_energy(out.current[finest], m.fp, out.e_eq0);
    out.beta_eff = effective_beta(out.e_tot, table);
    std::vector<double> fit_col(out.beta_eff.times.size(), std::numeric_limits<double>::quiet_NaN());
    std::string fit_note = "none";
    std::function<double(double)> beta_at = [&](double t) { return interpolate(out.beta_eff, t); };
    try {
      const BetaFit fit = fit_beta(out.beta_eff, c.t_fit_start, 0.05, c.fit_family);
      for (int i = 0; i < out.beta_eff.times.size(); ++i)
        if (out.beta_eff.times[i] >= fit.t_start) fit_col[i] = fit(out.beta_eff.times[i]);
      fit_note = fit.describe();
    } catch (const ConfigError& e) {
      fit_note = std::string("rejected: ") + e.what();
    }
    if (write) {
      const std::string f = path_in(c, "beta_eff.csv");
      CsvHeader hb{c.hash(), "transient " + run_tag(c, finest), {{"fit", fit_note}}};
      write_csv(f, hb, {"t", "e_tot", "beta_eff", "beta_fit"},
                {to_std(out.beta_eff.times), to_std(out.e_tot.values), to_std(out.beta_eff.values), fit_col});
      out.files.push_back(f);
      write_slices(c, spectral_slices(sol, c, beta_at), run_tag(c, finest), out.files);
    }
  }
  if (!failures.empty()) throw ConvergenceError("transient: some runs failed (partial results kept)\n" + failures, {});
  return out;
}

BridgeArtifacts cmd_bridge(const RunConfig& c, const TransientSolution& base, const CalibrationTable& table,
                           bool write, const ProgressFn& progress) {
  const auto t0 = Clock::now();
  BridgeArtifacts out;
  const ContourGrid& g = *base.grid;
  if (c.t_patch < c.t_fit_start)
    throw PatchError("t_patch = " + fixed(c.t_patch) + " lies inside the transient before bridge.t_fit_start = " +
                     fixed(c.t_fit_start) + " (move t_patch later)");
  const double e_eq0 = equilibrium_energy(eq_params(c, c.U), c.T);
  const Trajectory beta = beta_trajectory(base, table, e_eq0);
  try {
    out.fit = fit_beta(beta, c.t_fit_start, 0.05, c.fit_family);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (raise t_max or move bridge.t_fit_start)");
  }
  note(progress, "bridge: beta fit " + out.fit.describe());
  const ComponentSet cs = extract_components(base.sigma);
  const RVector omega = omega_grid(-c.omega_max, c.omega_max, c.n_omega);
  try {
    out.steady = steady_retarded_sigma(cs.retarded, g.t_min, g.dt, c.t_on, c.t_patch - c.steady_window, c.t_patch,
                                       omega);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (move bridge.t_patch or raise t_max)");
  }
  const ExtensionTable ext = extend_sigma_lesser(out.steady, out.fit, g.t_min, c.t_max_new);
  out.extended = assemble_extended(base, ext, c.t_patch, c.t_max_new, BlendPolicy{c.blend_width},
                                    c.mixed_threshold);
  note(progress, "bridge: extended Dyson solve to t = " + std::to_string(c.t_max_new));
  const QuadratureGrid quad = gauss_hermite_joint(c.quad_order, c.quad_prune);
  const ExtendedObservables obs = extended_observables(out.extended, quad, base.params, c.threads);
  out.extended_current = obs.current;
  out.transient_current = current(base);
  out.seconds = seconds_since(t0);
  if (write) {
    ensure_directory(c.output_dir);
    std::vector<double> tj(out.extended_current.times.size(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < out.transient_current.values.size() && i < static_cast<int>(tj.size()); ++i)
      tj[i] = out.transient_current.values[i];
    CsvHeader h{c.hash(),
                "bridge",
                {{"t_patch", fixed(c.t_patch, 6)},
                 {"t_max_new", fixed(c.t_max_new, 6)},
                 {"fit", out.fit.describe()},
                 {"mixed_audit", std::to_string(out.extended.mixed_audit)},
                 {"continuity", std::to_string(out.extended.continuity)}}};
    const std::string f = path_in(c, "bridge_current.csv");
    write_csv(f, h, {"t", "j_extended", "j_transient"}, {to_std(out.extended_current.times), to_std(out.extended_current.values), tj});
    out.files.push_back(f);
  }
  return out;
}

}  // namespace nefk
