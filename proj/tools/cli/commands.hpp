// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace qwb::cli {

void add_data_commands(CLI::App& app, std::ostream& out);       // ingest, build-axes, embed, fixtures
void add_retrieval_commands(CLI::App& app, std::ostream& out);  // index-bm25, index-vec, search, eval
void add_diag_commands(CLI::App& app, std::ostream& out);       // diag-pairwise, distill, kernel

/// Parses and runs one command. Errors are reported on `err` as a JSON
/// envelope {"error": {"code", "message"}}; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwb::cli
