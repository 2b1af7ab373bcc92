// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "perfohom/config.hpp"
#include "perfohom/mesh.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace
{

int cli(std::initializer_list<std::string> args)
{
  std::vector<std::string> store{"perfohom"};
  store.insert(store.end(), args);
  std::vector<char *> argv;
  for (auto &s : store)
  {
    argv.push_back(s.data());
  }
  return perfohom::cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path write_ini(const fs::path &dir, const std::string &text)
{
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("mesh commands write loadable meshes")
{
  const fs::path dir = test::temp_dir("cli_mesh");
  const fs::path ini = write_ini(dir, "[cell]\nresolution = 0.25\n[duct]\nresolution = 0.02\n");
  REQUIRE(cli({"mesh-cell", "--config", ini.string(), "--out", dir.string()}) == 0);
  REQUIRE(cli({"mesh-duct", "--config", ini.string(), "--out", dir.string()}) == 0);
  CHECK(perfohom::load_mesh(dir / "cell.pmesh").num_cells() > 0);
  CHECK(perfohom::load_mesh(dir / "duct.pmesh").has_group(perfohom::groups::kInlet));
  // The echoed configuration re-parses to the effective one.
  const perfohom::RunConfig echo = perfohom::load_config(dir / "config_echo.ini");
  CHECK(echo == perfohom::load_config(ini));
  CHECK_FALSE(fs::exists(dir / "error.json"));
}

TEST_CASE("configuration errors exit with code 2 and error.json")
{
  const fs::path dir = test::temp_dir("cli_bad");
  const fs::path ini = write_ini(dir, "[cell]\nresolution = -1\n");
  CHECK(cli({"mesh-cell", "--config", ini.string(), "--out", dir.string()}) == 2);
  const auto err = nlohmann::json::parse(test::slurp(dir / "error.json"));
  CHECK(err["status"] == "error");
  CHECK(err["command"] == "mesh-cell");
  CHECK(err["kind"] == "config");
  const fs::path typo = write_ini(dir, "[cell]\nresolutoin = 0.2\n");
  CHECK(cli({"cell", "--config", typo.string(), "--out", dir.string()}) == 2);
  // A later success removes the stale report.
  const fs::path good = write_ini(dir, "[cell]\nresolution = 0.25\n");
  CHECK(cli({"mesh-cell", "--config", good.string(), "--out", dir.string()}) == 0);
  CHECK_FALSE(fs::exists(dir / "error.json"));
}

TEST_CASE("cell command is deterministic and zero flow has zero flow coefficients")
{
  const fs::path a = test::temp_dir("cli_cell_a"), b = test::temp_dir("cli_cell_b");
  const fs::path ini = write_ini(a, "[cell]\nresolution = 0.25\nhole_slope_deg = 30\nU3 = 0\n");
  REQUIRE(cli({"cell", "--config", ini.string(), "--out", a.string(), "--jobs", "1"}) == 0);
  REQUIRE(cli({"cell", "--config", ini.string(), "--out", b.string(), "--tol", "1e-10"}) == 0);
  for (const char *f : {"coefficients.csv", "coefficients.json", "cell_fields.pmesh"})
  {
    CHECK(test::slurp(a / f) == test::slurp(b / f));
  }
  const auto doc = nlohmann::json::parse(test::slurp(a / "coefficients.json"));
  const auto &k = doc["coefficients"];
  CHECK(k["Mw"].get<double>() == 0.0);
  CHECK(k["Tw"].get<double>() == 0.0);
  CHECK(k["Wbar"][0].get<double>() == 0.0);
  CHECK(doc["mach_bound_ok"].get<bool>());
}

TEST_CASE("sweep records failures without aborting")
{
  const fs::path dir = test::temp_dir("cli_sweep");
  const fs::path ini = write_ini(dir,
                                 "[cell]\nresolution = 0.25\n[sweep]\nangles_deg = 0, 60\n"
                                 "speeds = 0, 12\n");
  REQUIRE(cli({"sweep", "--config", ini.string(), "--out", dir.string()}) == 0);
  const std::string csv = test::slurp(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const std::string failures = test::slurp(dir / "sweep_failures.csv");
  CHECK(failures.find("60,12,") != std::string::npos);
}

TEST_CASE("waveguide command without flow")
{
  const fs::path dir = test::temp_dir("cli_wave");
  const fs::path ini = write_ini(dir,
                                 "[cell]\nresolution = 0.25\n[duct]\nresolution = 0.02\n"
                                 "[flow]\nmode = none\n[acoustics]\nn_freq = 3\n");
  REQUIRE(cli({"waveguide", "--config", ini.string(), "--out", dir.string()}) == 0);
  for (const char *f : {"tl.csv", "interface_profile.csv", "interface_coefficients.csv",
                        "snapshot.pmesh", "snapshot.json"})
  {
    CHECK(fs::exists(dir / f));
  }
  const std::string tl = test::slurp(dir / "tl.csv");
  CHECK(std::count(tl.begin(), tl.end(), '\n') == 4);
  const auto meta = nlohmann::json::parse(test::slurp(dir / "snapshot.json"));
  CHECK(meta["residual"].get<double>() <= 1e-10);
}
