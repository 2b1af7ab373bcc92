// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "perfohom/errors.hpp"

namespace perfohom
{

namespace
{

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
  {
    return {};
  }
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string &key, const std::string &v)
{
  const std::string t = trim(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
  {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

int to_int(const std::string &key, const std::string &v)
{
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9)
  {
    throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  }
  return static_cast<int>(x);
}

bool to_bool(const std::string &key, const std::string &v)
{
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes")
  {
    return true;
  }
  if (t == "false" || t == "0" || t == "no")
  {
    return false;
  }
  throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string &key, const std::string &v)
{
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    out.push_back(to_double(key, item));
  }
  if (out.empty())
  {
    throw ConfigError("'" + key + "': empty list");
  }
  return out;
}

std::string num(double x)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string list(const std::vector<double> &v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); i++)
  {
    s += (i ? ", " : "") + num(v[i]);
  }
  return s;
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;

const std::map<std::string, Setter> &setters()
{
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define PH_REAL(KEY, EXPR) \
  t[KEY] = [](RunConfig &c, const std::string &k, const std::string &v) { EXPR = to_double(k, v); }
    PH_REAL("cell.b1", c.cell.b1);
    PH_REAL("cell.b2", c.cell.b2);
    PH_REAL("cell.kappa", c.cell.kappa);
    PH_REAL("cell.plate_thickness", c.cell.plate_thickness);
    PH_REAL("cell.hole_diameter", c.cell.hole_diameter);
    PH_REAL("cell.hole_slope_deg", c.cell.hole_slope_deg);
    PH_REAL("cell.eps0", c.cell.eps0);
    PH_REAL("cell.resolution", c.cell_resolution);
    PH_REAL("cell.U3", c.U3);
    PH_REAL("fluid.rho0", c.fluid.rho0);
    PH_REAL("fluid.c", c.fluid.c);
    PH_REAL("fluid.tau", c.fluid.tau);
    PH_REAL("duct.l_m", c.duct.l_m);
    PH_REAL("duct.h_m", c.duct.h_m);
    PH_REAL("duct.l_io", c.duct.l_io);
    PH_REAL("duct.h_io", c.duct.h_io);
    PH_REAL("duct.width", c.duct.width);
    PH_REAL("duct.interface_height", c.duct.interface_height);
    PH_REAL("duct.port_offset", c.duct.port_offset);
    PH_REAL("duct.resolution", c.duct_resolution);
    PH_REAL("flow.U_in", c.U_in);
    PH_REAL("flow.U3_quantum", c.U3_quantum);
    PH_REAL("acoustics.p_incident", c.acoustics.p_incident);
    PH_REAL("acoustics.f_min_hz", c.f_min_hz);
    PH_REAL("acoustics.f_max_hz", c.f_max_hz);
    PH_REAL("solver.residual_tol", c.solver.residual_tol);
    PH_REAL("solver.compatibility_tol", c.solver.compatibility_tol);
#undef PH_REAL
    t["sweep.angles_deg"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.sweep_angles_deg = to_list(k, v); };
    t["sweep.speeds"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.sweep_speeds = to_list(k, v); };
    t["flow.mode"] = [](RunConfig &c, const std::string &, const std::string &v)
    { c.flow_mode = trim(v); };
    t["acoustics.n_freq"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.n_freq = to_int(k, v); };
    t["acoustics.outer_advection"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.acoustics.outer_advection = to_bool(k, v); };
    t["acoustics.flow_corrected_ports"] = [](RunConfig &c, const std::string &k,
                                             const std::string &v)
    { c.acoustics.flow_corrected_ports = to_bool(k, v); };
    t["acoustics.source_at_outlet"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.acoustics.source_at_outlet = to_bool(k, v); };
    t["run.seed"] = [](RunConfig &c, const std::string &k, const std::string &v)
    { c.seed = static_cast<unsigned>(to_int(k, v)); };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<double> RunConfig::frequencies_hz() const
{
  std::vector<double> f(static_cast<std::size_t>(n_freq));
  for (int k = 0; k < n_freq; k++)
  {
    f[k] = n_freq == 1 ? f_min_hz : f_min_hz + (f_max_hz - f_min_hz) * k / (n_freq - 1);
  }
  return f;
}

void RunConfig::validate() const
{
  try
  {
    cell.validate();
    fluid.validate();
    duct.validate();
  }
  catch (const Error &ex)
  {
    throw ConfigError(ex.what());
  }
  if (!(cell_resolution > 0.0) || !(duct_resolution > 0.0))
  {
    throw ConfigError("mesh resolutions must be positive");
  }
  if (sweep_angles_deg.empty() || sweep_speeds.empty())
  {
    throw ConfigError("sweep grids must be nonempty");
  }
  if (flow_mode != "potential" && flow_mode != "uniform" && flow_mode != "none")
  {
    throw ConfigError("flow.mode must be potential, uniform or none");
  }
  if (!(U3_quantum > 0.0))
  {
    throw ConfigError("flow.U3_quantum must be positive");
  }
  if (n_freq < 1 || !(f_min_hz > 0.0) || f_max_hz < f_min_hz)
  {
    throw ConfigError("frequency grid needs n_freq >= 1 and 0 < f_min_hz <= f_max_hz");
  }
  if (!(solver.residual_tol > 0.0) || !(solver.compatibility_tol > 0.0))
  {
    throw ConfigError("solver tolerances must be positive");
  }
}

bool RunConfig::operator==(const RunConfig &o) const
{
  std::ostringstream a, b;
  write_config(a, *this);
  write_config(b, o);
  return a.str() == b.str();
}

RunConfig parse_config(const std::string &text)
{
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try
  {
    boost::property_tree::ini_parser::read_ini(in, tree);
  }
  catch (const boost::property_tree::ini_parser_error &ex)
  {
    throw ConfigError("line " + std::to_string(ex.line()) + ": " + ex.message());
  }
  RunConfig cfg;
  for (const auto &[section, body] : tree)
  {
    if (body.empty())
    {
      throw ConfigError("key '" + section + "' outside a section");
    }
    for (const auto &[key, value] : body)
    {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end())
      {
        throw ConfigError("unknown setting '" + full + "'");
      }
      it->second(cfg, full, value.data());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
  std::ifstream f(path);
  if (!f)
  {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void write_config(std::ostream &out, const RunConfig &c)
{
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "; effective perfohom configuration\n\n"
      << "[run]\nseed = " << c.seed << "\n\n"
      << "[cell]\n"
      << "b1 = " << num(c.cell.b1) << "\nb2 = " << num(c.cell.b2)
      << "\nkappa = " << num(c.cell.kappa)
      << "\nplate_thickness = " << num(c.cell.plate_thickness)
      << "\nhole_diameter = " << num(c.cell.hole_diameter)
      << "\nhole_slope_deg = " << num(c.cell.hole_slope_deg) << "\neps0 = " << num(c.cell.eps0)
      << "\nresolution = " << num(c.cell_resolution) << "\nU3 = " << num(c.U3) << "\n\n"
      << "[sweep]\nangles_deg = " << list(c.sweep_angles_deg)
      << "\nspeeds = " << list(c.sweep_speeds) << "\n\n"
      << "[fluid]\n; rho0 as printed for the reference computation\n"
      << "rho0 = " << num(c.fluid.rho0) << "\nc = " << num(c.fluid.c)
      << "\ntau = " << num(c.fluid.tau) << "\n\n"
      << "[duct]\n"
      << "l_m = " << num(c.duct.l_m) << "\nh_m = " << num(c.duct.h_m)
      << "\nl_io = " << num(c.duct.l_io) << "\nh_io = " << num(c.duct.h_io)
      << "\nwidth = " << num(c.duct.width)
      << "\ninterface_height = " << num(c.duct.interface_height)
      << "\nport_offset = " << num(c.duct.port_offset)
      << "\nresolution = " << num(c.duct_resolution) << "\n\n"
      << "[flow]\nmode = " << c.flow_mode << "\nU_in = " << num(c.U_in)
      << "\nU3_quantum = " << num(c.U3_quantum) << "\n\n"
      << "[acoustics]\n"
      << "p_incident = " << num(c.acoustics.p_incident)
      << "\nf_min_hz = " << num(c.f_min_hz) << "\nf_max_hz = " << num(c.f_max_hz)
      << "\nn_freq = " << c.n_freq << "\nouter_advection = " << b(c.acoustics.outer_advection)
      << "\nflow_corrected_ports = " << b(c.acoustics.flow_corrected_ports)
      << "\nsource_at_outlet = " << b(c.acoustics.source_at_outlet) << "\n\n"
      << "[solver]\nresidual_tol = " << num(c.solver.residual_tol)
      << "\ncompatibility_tol = " << num(c.solver.compatibility_tol) << "\n";
}

}  // namespace perfohom
