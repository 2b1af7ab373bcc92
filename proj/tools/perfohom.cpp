// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

int main(int argc, char **argv) { return perfohom::cli::run(argc, argv); }
