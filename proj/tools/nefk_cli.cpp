#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "nefk/errors.hpp"
#include "nefk/pipeline.hpp"

namespace {

enum Exit { ok = 0, other = 1, config = 2, convergence = 3, patch = 4, singular = 5 };

nefk::RunConfig make_config(const std::string& path, const std::vector<std::string>& sets, const std::string& out) {
  nefk::RunConfig c = path.empty() ? nefk::RunConfig{} : nefk::load_config(path);
  for (const auto& s : sets) nefk::apply_override(c, s);
  if (!out.empty()) c.output_dir = out;
  if (const char* th = std::getenv("NEFK_THREADS")) nefk::apply_override(c, std::string("output.threads=") + th);
  c.validate();
  return c;
}

void list(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient DMFT for the field-driven Falicov-Kimball model"};
  app.require_subcommand(1);
  std::string cfg_path, out_dir;
  std::vector<std::string> sets;
  bool quiet = false;
  app.add_option("-c,--config", cfg_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", sets, "Override, e.g. field.E=0.5 (repeatable)");
  app.add_option("-o,--output", out_dir, "Output directory");
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");
  auto* eq = app.add_subcommand("equilibrium", "Equilibrium Sigma/DOS panels and the calibration table");
  auto* tr = app.add_subcommand("transient", "Three dt runs, extrapolation, Wigner slices and beta_eff");
  auto* br = app.add_subcommand("bridge", "Beta fit, self-energy extension and the extended current");
  auto* all = app.add_subcommand("all", "equilibrium, transient and bridge in sequence");
  auto* def = app.add_subcommand("defaults", "Print the resolved configuration as JSON");
  CLI11_PARSE(app, argc, argv);

  const nefk::ProgressFn progress = [quiet](const std::string& m) {
    if (!quiet) std::cerr << m << "\n";
  };
  try {
    const nefk::RunConfig c = make_config(cfg_path, sets, out_dir);
    if (*def) {
      std::cout << nefk::config_to_json(c) << "\n";
      return ok;
    }
    if (*eq || *all) list(nefk::cmd_equilibrium(c).files);
    if (*tr || *all) {
      const auto t = nefk::cmd_transient(c, true, progress);
      list(t.files);
      for (const auto& r : t.reports)
        progress("dt=" + std::to_string(r.dt) + " seconds=" + std::to_string(r.seconds) +
                 (r.resumed ? " (resumed)" : ""));
    }
    if (*br || *all) {
      auto base = nefk::solve_run(c, c.bridge_run, nullptr, progress);
      const auto b = nefk::cmd_bridge(c, *base, nefk::calibrate(c), true, progress);
      list(b.files);
      progress("bridge seconds=" + std::to_string(b.seconds));
    }
    return ok;
  } catch (const nefk::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return config;
  } catch (const nefk::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return convergence;
  } catch (const nefk::PatchError& e) {
    std::cerr << "patch error: " << e.what() << "\n";
    return patch;
  } catch (const nefk::SingularKernel& e) {
    std::cerr << "singular kernel: " << e.what() << "\n";
    return singular;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return other;
  }
}
