#pragma once

// Subcommands of the `casimir` tool. Each returns a process exit code:
// 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "casimir/cli/config.hpp"
#include "casimir/coupling.hpp"
#include "casimir/dispersion.hpp"
#include "casimir/errors.hpp"
#include "casimir/force.hpp"
#include "casimir/io/csv.hpp"
#include "casimir/nonlinear.hpp"
#include "casimir/parallel.hpp"
#include "casimir/units.hpp"

namespace casimir::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CliOptions {
  std::string config;
  std::string out;  // overrides CASIMIR_OUT_DIR and outputs.directory
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  bool paper_literal = false;
  bool no_header_timestamp = false;
};

struct SweepRecord {
  double h_um = 0.0;
  double T_K = 0.0;
  double force_Pa = 0.0;
  double energy_J_per_m2 = 0.0;
  double error_estimate_Pa = 0.0;
  std::size_t matsubara_terms = 0;
  std::size_t quadrature_evaluations = 0;
  std::string status = "ok";
  double wall_time_ms = 0.0;
};

namespace detail {

inline std::filesystem::path output_dir(const CliOptions& opt, const RunConfig& cfg) {
  std::filesystem::path dir;
  if (!opt.out.empty()) {
    dir = opt.out;
  } else if (const char* env = std::getenv("CASIMIR_OUT_DIR"); env && *env) {
    dir = env;
  } else {
    dir = cfg.outputs.directory;
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config_error, "cannot write '" + path.string() + "'");
  return os;
}

inline io::Metadata metadata(const CliOptions& opt, const RunConfig& cfg, const std::string& command) {
  io::Metadata m{command, !opt.no_header_timestamp, {}};
  m.extra.emplace_back("config", cfg.source.filename().string());
  return m;
}

inline DeltaOptions delta_options(const CliOptions& opt, const RunConfig& cfg) {
  DeltaOptions d;
  d.rel_tol = cfg.numerics.delta_tol;
  d.max_evaluations = cfg.numerics.max_evaluations;
  d.method = cfg.numerics.method;
  d.mc_samples = cfg.numerics.mc_samples;
  d.seed = opt.seed.value_or(cfg.numerics.seed);
  d.paper_literal = opt.paper_literal;
  return d;
}

/// Delta table for the force: loaded from disk, built from the kernels, or
/// null for a linear medium.
inline std::shared_ptr<const DeltaTable> resolve_delta(const CliOptions& opt, const RunConfig& cfg) {
  if (cfg.delta_table) return std::make_shared<const DeltaTable>(DeltaTable::read_csv_file(cfg.delta_table->string()));
  if (cfg.kernels.empty()) return nullptr;
  return std::make_shared<const DeltaTable>(
      build_delta_table(cfg.kernels, delta_options(opt, cfg), cfg.numerics.delta_nodes, 0.0, opt.jobs));
}

inline SpectralFunction input_im_chi1(const RunConfig& cfg) {
  if (cfg.susceptibility) return SpectralFunction(cfg.susceptibility->frequencies, cfg.susceptibility->im_chi1);
  return im_chi_spectrum(cfg.medium, default_grid(cfg.medium, cfg.numerics.grid_points));
}

inline PlateSystem plate_system(const RunConfig& cfg, double h_um, double T_K,
                                std::shared_ptr<const DeltaTable> delta) {
  PlateSystem s;
  s.separation = h_um;
  s.temperature = units::temperature_to_natural(T_K);
  s.medium = cfg.medium;
  s.delta = std::move(delta);
  s.polarizations = cfg.polarizations;
  return s;
}

}  // namespace detail

/// Tabulates eps(w) on the real axis and eps(i xi) on the same grid.
inline int cmd_dispersion(const CliOptions& opt, std::ostream& log = std::cerr) {
  const auto cfg = load_config(opt.config);
  const auto dir = detail::output_dir(opt, cfg);
  const auto grid = default_grid(cfg.medium, cfg.numerics.grid_points);
  auto os = detail::open_output(dir / "dispersion.csv");
  io::write_metadata(os, detail::metadata(opt, cfg, "dispersion"));
  const std::vector<std::string> cols{"omega", "re_eps", "im_eps", "xi", "eps_imag_axis"};
  io::write_header(os, cols);
  for (double w : grid) {
    const auto eps = permittivity(cfg.medium, w);
    const double row[] = {w, eps.real(), eps.imag(), w, permittivity_imag_axis(cfg.medium, w)};
    io::write_row(os, row);
  }
  log << "wrote " << (dir / "dispersion.csv").string() << " (" << grid.size() << " rows)\n";
  return kExitOk;
}

/// nu1 from Im chi1 and, when Im chi^(n) is given, nu_n on its axis grid.
inline int cmd_invert_coupling(const CliOptions& opt, std::ostream& log = std::cerr) {
  const auto cfg = load_config(opt.config);
  const auto dir = detail::output_dir(opt, cfg);
  const auto im_chi1 = detail::input_im_chi1(cfg);
  const auto nu1 = coupling1_from_chi(im_chi1);
  {
    auto os = detail::open_output(dir / "coupling1.csv");
    io::write_metadata(os, detail::metadata(opt, cfg, "invert-coupling"));
    const std::vector<std::string> cols{"omega", "im_chi1", "nu1"};
    io::write_header(os, cols);
    for (std::size_t i = 0; i < nu1.size(); ++i) {
      const double row[] = {nu1.grid()[i], im_chi1.values()[i], nu1.values()[i]};
      io::write_row(os, row);
    }
  }
  log << "wrote " << (dir / "coupling1.csv").string() << "\n";
  if (!cfg.susceptibility || cfg.susceptibility->order == 0) return kExitOk;

  const auto& in = *cfg.susceptibility;
  const auto kernel = SusceptibilityKernel::tabulated_im(in.axes, in.samples);
  const std::size_t n = in.order;
  std::vector<std::string> cols;
  for (std::size_t k = 1; k <= n; ++k) cols.push_back("omega_" + std::to_string(k));
  cols.emplace_back("im_chi_n");
  cols.emplace_back("nu_n");
  auto os = detail::open_output(dir / "coupling_n.csv");
  io::write_metadata(os, detail::metadata(opt, cfg, "invert-coupling"));
  io::write_header(os, cols);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> w(n);
  std::vector<double> row(n + 2);
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) w[k] = in.axes[k][idx[k]];
    for (std::size_t k = 0; k < n; ++k) row[k] = w[k];
    row[n] = kernel(w).real();
    row[n + 1] = coupling_n_from_chi(kernel, im_chi1, w);
    io::write_row(os, row);
    std::size_t k = n;
    while (k > 0 && ++idx[k - 1] == in.axes[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }
  log << "wrote " << (dir / "coupling_n.csv").string() << "\n";
  return kExitOk;
}

/// Delta(i xi) per order on the Chebyshev nodes, in the format the force
/// command reads back.
inline int cmd_delta(const CliOptions& opt, std::ostream& log = std::cerr) {
  const auto cfg = load_config(opt.config);
  if (cfg.kernels.empty()) throw Error(ErrorKind::config_error, "nonlinear.kernels: no kernels to evaluate");
  const auto dir = detail::output_dir(opt, cfg);
  const auto table =
      build_delta_table(cfg.kernels, detail::delta_options(opt, cfg), cfg.numerics.delta_nodes, 0.0, opt.jobs);
  auto os = detail::open_output(dir / "delta.csv");
  auto meta = detail::metadata(opt, cfg, "delta");
  meta.extra.emplace_back("delta_tol", io::format_double(cfg.numerics.delta_tol));
  meta.extra.emplace_back("paper_literal", opt.paper_literal ? "true" : "false");
  io::write_metadata(os, meta);
  table.write_csv(os);
  log << "wrote " << (dir / "delta.csv").string() << " (" << table.xi().size() << " nodes)\n";
  return kExitOk;
}

/// Force and energy per (h, T) pair. Unconverged Matsubara sums are flagged
/// in the status column and turn the exit code to 3 once all rows are out.
inline int cmd_force(const CliOptions& opt, std::ostream& log = std::cerr) {
  const auto cfg = load_config(opt.config);
  if (cfg.separations_um.empty()) throw Error(ErrorKind::config_error, "geometry.separations_um: missing");
  const auto dir = detail::output_dir(opt, cfg);
  const auto delta = detail::resolve_delta(opt, cfg);

  std::vector<SweepRecord> records;
  for (double h : cfg.separations_um)
    for (double T : cfg.temperatures_K) records.push_back(SweepRecord{h, T});

  const double tol = cfg.numerics.rel_tol;
  const std::size_t max_terms = cfg.numerics.max_matsubara;
  parallel_for_index(records.size(), opt.jobs, [&](std::size_t i) {
    auto& r = records[i];
    const auto start = std::chrono::steady_clock::now();
    const auto system = detail::plate_system(cfg, r.h_um, r.T_K, delta);
    ForceResult f;
    ForceResult e;
    try {
      f = casimir_force(system, tol, max_terms);
    } catch (const SumNotConverged& ex) {
      f = ex.partial();
      r.status = "sum_not_converged";
    }
    try {
      e = casimir_energy_per_area(system, std::min(tol, 1e-12), max_terms);
    } catch (const SumNotConverged& ex) {
      e = ex.partial();
      r.status = "sum_not_converged";
    }
    r.force_Pa = units::pressure_to_pascal(f.force_per_area);
    r.energy_J_per_m2 = units::energy_density_to_si(e.force_per_area);
    r.error_estimate_Pa = units::pressure_to_pascal(f.error_estimate);
    r.matsubara_terms = f.matsubara_terms_used;
    r.quadrature_evaluations = f.quadrature_evaluations;
    if (!opt.no_header_timestamp)
      r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });

  bool failed = false;
  if (cfg.outputs.csv) {
    auto os = detail::open_output(dir / "force.csv");
    auto meta = detail::metadata(opt, cfg, "force");
    meta.extra.emplace_back("rel_tol", io::format_double(tol));
    meta.extra.emplace_back("polarizations", std::to_string(cfg.polarizations));
    meta.extra.emplace_back("nonlinear", delta ? "delta_table" : "none");
    io::write_metadata(os, meta);
    os << "h_um,T_K,force_Pa,energy_J_per_m2,error_estimate_Pa,matsubara_terms,quadrature_evaluations,status,"
          "wall_time_ms\n";
    for (const auto& r : records) {
      os << io::format_double(r.h_um) << ',' << io::format_double(r.T_K) << ',' << io::format_double(r.force_Pa)
         << ',' << io::format_double(r.energy_J_per_m2) << ',' << io::format_double(r.error_estimate_Pa) << ','
         << r.matsubara_terms << ',' << r.quadrature_evaluations << ',' << r.status << ','
         << io::format_double(r.wall_time_ms) << '\n';
    }
  }
  if (cfg.outputs.json) {
    Json doc;
    doc["generator"] = std::string("casimir ") + io::kVersion + " force";
    if (!opt.no_header_timestamp) doc["timestamp"] = io::utc_timestamp();
    doc["records"] = Json::array();
    for (const auto& r : records) {
      doc["records"].push_back({{"h_um", r.h_um},
                                {"T_K", r.T_K},
                                {"force_Pa", r.force_Pa},
                                {"energy_J_per_m2", r.energy_J_per_m2},
                                {"error_estimate_Pa", r.error_estimate_Pa},
                                {"matsubara_terms", r.matsubara_terms},
                                {"quadrature_evaluations", r.quadrature_evaluations},
                                {"status", r.status},
                                {"wall_time_ms", r.wall_time_ms}});
    }
    auto os = detail::open_output(dir / "force.json");
    os << doc.dump(2) << '\n';
  }
  for (const auto& r : records) {
    if (r.status != "ok") {
      failed = true;
      log << "h = " << r.h_um << " um, T = " << r.T_K << " K: " << r.status << "\n";
    }
  }
  log << "wrote " << records.size() << " records to " << dir.string() << "\n";
  return failed ? kExitNumerical : kExitOk;
}

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

/// Kramers-Kronig residual, energy/force gradient check, T -> 0 duality and
/// Delta positivity.
inline std::vector<CheckResult> run_checks(const CliOptions& opt, const RunConfig& cfg) {
  std::vector<CheckResult> out;
  const double f0 = cfg.medium.dominant_frequency();
  const std::vector<double> probes{0.1 * f0, 0.5 * f0, f0, 2.0 * f0, 10.0 * f0};
  const double kk = kk_residual(cfg.medium, probes, cfg.numerics.grid_points);
  out.push_back({"kk_residual", kk, 1e-4, kk <= 1e-4, ""});

  std::shared_ptr<const DeltaTable> delta;
  try {
    delta = detail::resolve_delta(opt, cfg);
    double min_value = 0.0;
    if (delta)
      for (const auto& col : delta->values())
        for (double v : col) min_value = std::min(min_value, v);
    out.push_back({"delta_positivity", min_value, 0.0, true, delta ? "" : "no nonlinear terms"});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::negative_delta) throw;
    out.push_back({"delta_positivity", -1.0, 0.0, false, e.what()});
    delta = nullptr;
  }

  const double h = cfg.separations_um.empty() ? 1.0 : cfg.separations_um.front();
  const double T = cfg.temperatures_K.front();
  {
    auto system = detail::plate_system(cfg, h, T, delta);
    const double dh = 1e-4 * h;
    const double tol = std::min(cfg.numerics.rel_tol, 1e-10);
    const double F = casimir_force(system, tol, cfg.numerics.max_matsubara).force_per_area;
    system.separation = h + dh;
    const double Ep = casimir_energy_per_area(system, 1e-13, cfg.numerics.max_matsubara).force_per_area;
    system.separation = h - dh;
    const double Em = casimir_energy_per_area(system, 1e-13, cfg.numerics.max_matsubara).force_per_area;
    const double rel = std::abs(-(Ep - Em) / (2.0 * dh) - F) / std::abs(F);
    out.push_back({"gradient", rel, 1e-5, rel <= 1e-5, ""});
  }
  {
    // Temperature with xi_1 h = 0.05.
    auto system = detail::plate_system(cfg, h, 0.0, delta);
    const double F0 = casimir_force_T0(system, 1e-10).force_per_area;
    system.temperature = 0.05 / (2.0 * std::numbers::pi * h);
    const double FT = casimir_force_finiteT(system, 1e-10, cfg.numerics.max_matsubara).force_per_area;
    const double rel = std::abs(FT - F0) / std::abs(F0);
    out.push_back({"duality", rel, 1e-3, rel <= 1e-3, ""});
  }
  return out;
}

inline int cmd_validate(const CliOptions& opt, std::ostream& log = std::cerr) {
  const auto cfg = load_config(opt.config);
  const auto dir = detail::output_dir(opt, cfg);
  const auto checks = run_checks(opt, cfg);
  auto os = detail::open_output(dir / "validate.csv");
  io::write_metadata(os, detail::metadata(opt, cfg, "validate"));
  os << "check,value,tolerance,status,note\n";
  bool ok = true;
  for (const auto& c : checks) {
    os << c.name << ',' << io::format_double(c.value) << ',' << io::format_double(c.tolerance) << ','
       << (c.passed ? "pass" : "fail") << ',' << c.note << '\n';
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (tolerance " << c.tolerance << ")"
        << (c.note.empty() ? "" : "  " + c.note) << "\n";
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitNumerical;
}

/// Command-line entry point.
inline int run(int argc, char** argv, std::ostream& log = std::cerr) {
  CLI::App app{"Casimir force between conducting plates across a dispersive nonlinear medium", "casimir"};
  app.require_subcommand(1);
  CliOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides CASIMIR_OUT_DIR and the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    sub->add_option("--seed", seed, "random seed for Monte Carlo integration");
    sub->add_flag("--paper-literal", opt.paper_literal, "asymmetric third-order Delta denominators");
    sub->add_flag("--no-header-timestamp", opt.no_header_timestamp,
                  "omit the timestamp line and zero the wall_time_ms column");
  };
  const std::vector<std::pair<std::string, std::string>> names{
      {"dispersion", "tabulate eps(w) and eps(i xi)"},
      {"invert-coupling", "coupling functions from Im chi"},
      {"delta", "tabulate the nonlinear corrections Delta(i xi)"},
      {"force", "force and energy sweep over separations and temperatures"},
      {"validate", "Kramers-Kronig, gradient, duality and positivity checks"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : names) {
    subs.push_back(app.add_subcommand(name, help));
    add_common(subs.back());
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  for (auto* s : subs)
    if (s->get_option("--seed")->count() > 0) opt.seed = seed;

  try {
    if (subs[0]->parsed()) return cmd_dispersion(opt, log);
    if (subs[1]->parsed()) return cmd_invert_coupling(opt, log);
    if (subs[2]->parsed()) return cmd_delta(opt, log);
    if (subs[3]->parsed()) return cmd_force(opt, log);
    return cmd_validate(opt, log);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.is_config() ? kExitConfig : kExitNumerical;
  } catch (const std::invalid_argument& e) {
    log << "error: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace casimir::cli
