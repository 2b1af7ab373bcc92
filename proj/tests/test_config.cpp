// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "perfohom/config.hpp"
#include "perfohom/errors.hpp"

using namespace perfohom;

TEST_CASE("empty config gives the reference setup")
{
  const RunConfig c = parse_config("");
  CHECK(c.fluid.rho0 == 1.55);
  CHECK(c.fluid.c == 343.0);
  CHECK(c.cell.eps0 == 0.025);
  CHECK(c.cell.plate_thickness == 0.25);
  CHECK(c.sweep_angles_deg.size() == 3);
  CHECK(c.sweep_speeds.size() == 12);
  CHECK(c.sweep_speeds.back() == 5.5);
  CHECK(c.acoustics.p_incident == 300.0);
  CHECK(c.frequencies_hz().size() == 30);
  CHECK(c.frequencies_hz().front() == 100.0);
  CHECK(c.frequencies_hz().back() == 2000.0);
}

TEST_CASE("echoed config re-parses to the identical run")
{
  RunConfig c;
  c.cell.hole_slope_deg = -30.0;
  c.U3 = 0.1 + 0.2;  // not exactly representable in short decimal form
  c.sweep_speeds = {0.0, 1.0 / 3.0};
  c.flow_mode = "uniform";
  c.acoustics.flow_corrected_ports = true;
  c.solver.residual_tol = 3e-11;
  c.n_freq = 7;
  std::ostringstream out;
  write_config(out, c);
  const RunConfig back = parse_config(out.str());
  CHECK(back == c);
  CHECK(back.U3 == c.U3);
  CHECK(back.sweep_speeds[1] == 1.0 / 3.0);
  std::ostringstream again;
  write_config(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("config values and lists")
{
  const RunConfig c = parse_config("; comment\n[cell]\nhole_slope_deg = 60\nU3 = 2.5\n"
                                   "[sweep]\nangles_deg = -30, 0,30\nspeeds = 1\n"
                                   "[acoustics]\nsource_at_outlet = true\nn_freq = 2\n");
  CHECK(c.cell.hole_slope_deg == 60.0);
  CHECK(c.U3 == 2.5);
  CHECK(c.sweep_angles_deg == std::vector<double>{-30.0, 0.0, 30.0});
  CHECK(c.sweep_speeds == std::vector<double>{1.0});
  CHECK(c.acoustics.source_at_outlet);
  CHECK(c.frequencies_hz() == std::vector<double>{100.0, 2000.0});
}

TEST_CASE("config errors")
{
  CHECK_THROWS_AS(parse_config("[cell]\nradius = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[cell]\nU3 = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[cell]\nU3 = 1.0x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[acoustics]\nn_freq = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[acoustics]\nn_freq = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[flow]\nmode = turbulent\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[cell]\nplate_thickness = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[fluid]\ntau = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nspeeds = 1,,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[cell\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/perfohom.ini"), ConfigError);
}
