// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_CONFIG_HPP
#define PERFOHOM_CONFIG_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "perfohom/fem.hpp"
#include "perfohom/macro_acoustics.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

//
// Effective settings of a run. Every field has a default, so an empty file
// is a valid configuration.
//
struct RunConfig
{
  CellGeometry cell;
  double cell_resolution = 0.1;
  double U3 = 0.0;  // transverse speed of the `cell` command

  std::vector<double> sweep_angles_deg = {0.0, 30.0, 60.0};
  std::vector<double> sweep_speeds = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5};

  FluidProperties fluid;

  WaveguideGeometry duct;
  double duct_resolution = 0.005;

  std::string flow_mode = "potential";  // potential | uniform | none
  double U_in = 25.0;
  double U3_quantum = 0.05;

  MacroOptions acoustics;  // eps0 and solver are taken from `cell` and `solver`
  double f_min_hz = 100.0;
  double f_max_hz = 2000.0;
  int n_freq = 30;

  SolveOptions solver;
  unsigned seed = 1;

  std::vector<double> frequencies_hz() const;
  void validate() const;
  bool operator==(const RunConfig &) const;
};

// INI-style key/value text; unknown sections or keys are rejected.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::filesystem::path &path);
// Writes every effective value; parse_config(write) reproduces the config.
void write_config(std::ostream &out, const RunConfig &cfg);

}  // namespace perfohom

#endif  // PERFOHOM_CONFIG_HPP
