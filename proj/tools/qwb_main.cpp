// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qwb::cli::run(args, std::cout, std::cerr);
}
