// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_TOOLS_COMMANDS_HPP
#define PERFOHOM_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "perfohom/config.hpp"

namespace perfohom::cli
{

// Files written by a command, relative to the output directory.
struct CommandResult
{
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;  // recorded per-item failures
};

CommandResult cmd_mesh_cell(const RunConfig &cfg, const std::filesystem::path &out);
CommandResult cmd_mesh_duct(const RunConfig &cfg, const std::filesystem::path &out);
CommandResult cmd_cell(const RunConfig &cfg, const std::filesystem::path &out);
CommandResult cmd_sweep(const RunConfig &cfg, const std::filesystem::path &out);
CommandResult cmd_waveguide(const RunConfig &cfg, const std::filesystem::path &out);

//
// Full front-end: parses argv, runs the command, writes config_echo.ini and,
// on failure, error.json into the output directory. Returns the exit code.
//
int run(int argc, char **argv);

}  // namespace perfohom::cli

#endif  // PERFOHOM_TOOLS_COMMANDS_HPP
