// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfohom/cell_flow.hpp"
#include "perfohom/cell_problems.hpp"
#include "perfohom/coefficients.hpp"
#include "perfohom/errors.hpp"
#include "perfohom/macro_acoustics.hpp"
#include "perfohom/macro_flow.hpp"
#include "perfohom/parallel.hpp"

namespace perfohom::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::ofstream open_out(const fs::path &path)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
  {
    throw Error("cannot write " + path.string());
  }
  return f;
}

void write_text(const fs::path &path, const std::string &text)
{
  auto f = open_out(path);
  f << text;
  if (!f)
  {
    throw Error("write failed: " + path.string());
  }
}

NodalField scalar_field(std::string name, const std::vector<double> &v)
{
  return {std::move(name), 1, v};
}

NodalField vector_field(std::string name, const std::vector<Vec3> &v)
{
  NodalField f{std::move(name), 3, {}};
  f.values.reserve(3 * v.size());
  for (const auto &x : v)
  {
    f.values.insert(f.values.end(), x.begin(), x.end());
  }
  return f;
}

NodalField complex_field(std::string name, const Eigen::VectorXcd &v)
{
  NodalField f{std::move(name), 2, {}};
  f.values.reserve(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); i++)
  {
    f.values.push_back(v[i].real());
    f.values.push_back(v[i].imag());
  }
  return f;
}

json coefficients_json(const HomogenizedCoefficients &k)
{
  return {{"phi_deg", k.phi_deg},
          {"U3", k.U3},
          {"A", {{k.A[0][0], k.A[0][1]}, {k.A[1][0], k.A[1][1]}}},
          {"B", {k.B[0], k.B[1]}},
          {"Bp", {k.Bp[0], k.Bp[1]}},
          {"F", k.F},
          {"Mw", k.Mw},
          {"Tw", k.Tw},
          {"Twp", k.Twp},
          {"Wbar", {k.Wbar[0], k.Wbar[1]}},
          {"Wbarp", {k.Wbarp[0], k.Wbarp[1]}},
          {"Qw", {k.Qw[0], k.Qw[1]}},
          {"zeta_star", k.zeta_star},
          {"kappa", k.kappa},
          {"max_speed", k.max_speed},
          {"mesh_id", k.mesh_id}};
}

MacroFlowField make_flow(const RunConfig &cfg, const Mesh &mesh)
{
  if (cfg.flow_mode == "potential")
  {
    return solve_macro_potential_flow(mesh, cfg.U_in, cfg.fluid, Exec::parallel, cfg.solver);
  }
  if (cfg.flow_mode == "uniform")
  {
    return uniform_macro_flow(mesh, cfg.U_in, cfg.fluid);
  }
  MacroFlowField f;
  f.topology = analyze_waveguide(mesh);
  f.U3_nodes.assign(f.topology.num_interface_nodes(), 0.0);
  f.U3_elements.assign(f.topology.num_interface_segments(), 0.0);
  return f;
}

}  // namespace

CommandResult cmd_mesh_cell(const RunConfig &cfg, const fs::path &out)
{
  const Mesh mesh = generate_unit_cell_mesh(cfg.cell, cfg.cell_resolution);
  save_mesh(mesh, out / "cell.pmesh");
  return {{"cell.pmesh"}, {}};
}

CommandResult cmd_mesh_duct(const RunConfig &cfg, const fs::path &out)
{
  const Mesh mesh = generate_waveguide_mesh(cfg.duct, cfg.duct_resolution);
  save_mesh(mesh, out / "duct.pmesh");
  return {{"duct.pmesh"}, {}};
}

CommandResult cmd_cell(const RunConfig &cfg, const fs::path &out)
{
  const Mesh mesh = generate_unit_cell_mesh(cfg.cell, cfg.cell_resolution);
  const FlowField flow =
      solve_cell_potential_flow(mesh, cfg.U3, cfg.fluid, Exec::parallel, cfg.solver);
  const CellProblems problems(mesh, flow, cfg.fluid, cfg.cell.xi_area(), Exec::parallel,
                              cfg.solver);
  const CellSolutionSet sols = problems.solve_all();
  HomogenizedCoefficients k = compute_coefficients(mesh, flow, sols, cfg.fluid, cfg.cell.kappa);
  k.U3 = cfg.U3;
  k.phi_deg = cfg.cell.hole_slope_deg;
  const SymmetryReport rep = verify_symmetries(k, cfg.fluid);

  const std::vector<NodalField> fields = {
      vector_field("w", flow.w),          scalar_field("Phi", flow.potential),
      scalar_field("pi1", sols.pi_beta[0]), scalar_field("pi2", sols.pi_beta[1]),
      scalar_field("xi", sols.xi),        scalar_field("piP", sols.pi_P)};
  save_mesh(mesh, out / "cell_fields.pmesh", fields);

  SweepRow row{k.phi_deg, k.U3, k, rep.max_structural_defect(), {}};
  auto csv = open_out(out / "coefficients.csv");
  write_sweep_csv(csv, {row});

  json checks = json::array();
  for (const auto &c : rep.checks)
  {
    checks.push_back({{"name", c.name}, {"defect", c.defect}, {"pass", c.pass}});
  }
  const json doc = {{"coefficients", coefficients_json(k)},
                    {"symmetry", checks},
                    {"compatibility_defects", sols.compatibility},
                    {"relative_residuals", sols.residual},
                    {"mach_bound_ok", flow.mach_bound_ok}};
  write_text(out / "coefficients.json", doc.dump(2) + "\n");
  return {{"cell_fields.pmesh", "coefficients.csv", "coefficients.json"}, {}};
}

CommandResult cmd_sweep(const RunConfig &cfg, const fs::path &out)
{
  const auto rows = sweep_coefficients(cfg.sweep_angles_deg, cfg.sweep_speeds, cfg.cell,
                                       cfg.cell_resolution, cfg.fluid, Exec::parallel, cfg.solver);
  CommandResult res{{"sweep.csv"}, {}};
  auto csv = open_out(out / "sweep.csv");
  write_sweep_csv(csv, rows);
  std::ostringstream failures;
  failures << "phi_deg,U3,error\n";
  for (const auto &r : rows)
  {
    if (!r.coeffs)
    {
      std::ostringstream w;
      w << "phi = " << r.phi_deg << " deg, U3 = " << r.U3 << " m/s: " << r.error;
      res.warnings.push_back(w.str());
      failures << r.phi_deg << ',' << r.U3 << ",\"" << r.error << "\"\n";
    }
  }
  write_text(out / "sweep_failures.csv", failures.str());
  res.outputs.push_back("sweep_failures.csv");
  return res;
}

CommandResult cmd_waveguide(const RunConfig &cfg, const fs::path &out)
{
  auto mesh = std::make_shared<const Mesh>(generate_waveguide_mesh(cfg.duct, cfg.duct_resolution));
  const MacroFlowField flow = make_flow(cfg, *mesh);
  {
    auto f = open_out(out / "interface_profile.csv");
    write_interface_profile_csv(f, flow);
  }

  CoefficientProvider provider(cfg.cell, cfg.cell_resolution, cfg.fluid, cfg.U3_quantum,
                               cfg.solver);
  const auto coeffs = provider.coefficients(flow.U3_elements);
  {
    auto f = open_out(out / "interface_coefficients.csv");
    f.precision(17);
    f << "x1_mid,U3,U3_cell,A11,B1,Bp1,F,Mw,Tw,Twp,W1,zeta_star\n";
    const auto &x = flow.topology.x1;
    for (std::size_t e = 0; e < coeffs.size(); e++)
    {
      const auto &k = coeffs[e];
      f << 0.5 * (x[e] + x[e + 1]) << ',' << flow.U3_elements[e] << ',' << k.U3 << ','
        << k.A[0][0] << ',' << k.B[0] << ',' << k.Bp[0] << ',' << k.F << ',' << k.Mw << ','
        << k.Tw << ',' << k.Twp << ',' << k.Wbar[0] << ',' << k.zeta_star << '\n';
    }
  }

  MacroOptions opts = cfg.acoustics;
  opts.eps0 = cfg.cell.eps0;
  opts.solver = cfg.solver;
  const MacroProblem pb = make_macro_problem(mesh, flow.flow, coeffs, cfg.fluid, opts);

  std::vector<double> omegas;
  for (double f : cfg.frequencies_hz())
  {
    omegas.push_back(2.0 * std::numbers::pi * f);
  }
  const auto points = frequency_sweep(pb, omegas);
  CommandResult res{{"interface_profile.csv", "interface_coefficients.csv", "tl.csv"}, {}};
  {
    auto f = open_out(out / "tl.csv");
    write_tl_csv(f, points);
  }
  std::size_t ok = 0;
  for (const auto &p : points)
  {
    if (p.tl)
    {
      ok++;
    }
    else
    {
      res.warnings.push_back(p.error);
    }
  }
  if (ok == 0)
  {
    throw SolverError("every frequency failed; first error: " + points.front().error);
  }

  // Snapshot at the middle of the band.
  const double omega = omegas[omegas.size() / 2];
  const MacroSolution sol = solve_frequency(pb, omega);
  Eigen::VectorXcd G = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(mesh->num_nodes()));
  for (std::size_t i = 0; i < pb.num_interface_nodes(); i++)
  {
    G[pb.topology.plus_nodes[i]] = sol.G_plus[static_cast<Eigen::Index>(i)];
    G[pb.topology.minus_nodes[i]] = sol.G_minus[static_cast<Eigen::Index>(i)];
  }
  std::vector<NodalField> fields = {complex_field("P", sol.P), complex_field("G", G)};
  if (!flow.flow.empty())
  {
    fields.push_back(vector_field("w", flow.flow.w));
  }
  save_mesh(*mesh, out / "snapshot.pmesh", fields);
  res.outputs.push_back("snapshot.pmesh");
  std::ostringstream meta;
  meta.precision(17);
  meta << json{{"omega_rad_s", omega},
               {"freq_hz", omega / (2.0 * std::numbers::pi)},
               {"residual", sol.residual},
               {"cell_solves", provider.cell_solves()},
               {"max_flow_speed", flow.flow.max_speed},
               {"inlet_flux", flow.inlet_flux},
               {"outlet_flux", flow.outlet_flux}}
              .dump(2)
       << '\n';
  write_text(out / "snapshot.json", meta.str());
  res.outputs.push_back("snapshot.json");
  return res;
}

int run(int argc, char **argv)
{
  CLI::App app{"perfohom: perforated-interface homogenization pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "out";
  std::optional<int> jobs;
  std::optional<double> tol;
  app.add_option("--config", config_path, "INI configuration file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads (overrides PERFOHOM_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "relative residual tolerance of the linear solves")
      ->check(CLI::PositiveNumber);

  using Command = CommandResult (*)(const RunConfig &, const fs::path &);
  const std::pair<const char *, Command> table[] = {
      {"mesh-cell", cmd_mesh_cell},
      {"mesh-duct", cmd_mesh_duct},
      {"cell", cmd_cell},
      {"sweep", cmd_sweep},
      {"waveguide", cmd_waveguide}};
  const char *help[] = {"write the unit cell mesh", "write the waveguide mesh",
                        "corrector fields and coefficients for one (phi, U3)",
                        "coefficient table over the angle x speed grid",
                        "transmission loss curve and field snapshot"};
  std::vector<CLI::App *> subs;
  for (std::size_t i = 0; i < std::size(table); i++)
  {
    subs.push_back(app.add_subcommand(table[i].first, help[i]));
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e);
  }

  std::string name;
  Command command = nullptr;
  for (std::size_t i = 0; i < subs.size(); i++)
  {
    if (subs[i]->parsed())
    {
      name = table[i].first;
      command = table[i].second;
    }
  }

  const fs::path out(out_dir);
  auto fail = [&](const std::string &kind, const std::string &message, int code)
  {
    const json err = {{"status", "error"}, {"command", name}, {"kind", kind},
                      {"message", message}};
    std::cerr << err.dump() << '\n';
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream f(out / "error.json");
    f << err.dump(2) << '\n';
    return code;
  };

  RunConfig cfg;
  try
  {
    fs::create_directories(out);
    fs::remove(out / "error.json");
    if (!config_path.empty())
    {
      cfg = load_config(config_path);
    }
    if (tol)
    {
      cfg.solver.residual_tol = *tol;
    }
    cfg.validate();
    std::ostringstream echo;
    write_config(echo, cfg);
    write_text(out / "config_echo.ini", echo.str());
  }
  catch (const Error &ex)
  {
    return fail(ex.kind(), ex.what(), 2);
  }
  catch (const std::exception &ex)
  {
    return fail("io", ex.what(), 2);
  }
  if (jobs)
  {
    set_thread_count(*jobs);
  }

  try
  {
    const CommandResult res = command(cfg, out);
    for (const auto &w : res.warnings)
    {
      std::cerr << "warning: " << w << '\n';
    }
    for (const auto &o : res.outputs)
    {
      std::cout << (out / o).string() << '\n';
    }
  }
  catch (const Error &ex)
  {
    return fail(ex.kind(), ex.what(), 1);
  }
  catch (const std::exception &ex)
  {
    return fail("internal", ex.what(), 1);
  }
  return 0;
}

}  // namespace perfohom::cli
