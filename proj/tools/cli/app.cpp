// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <exception>

#include "commands.hpp"
#include "common.hpp"
#include "qwb/error.hpp"

namespace qwb::cli {

namespace {

void envelope(std::ostream& err, std::string_view code, const std::string& message) {
  err << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qwb: quantum-inspired embedding and hybrid retrieval workbench", "qwb"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  add_data_commands(app, out);
  add_retrieval_commands(app, out);
  add_diag_commands(app, out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    envelope(err, "UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    envelope(err, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    envelope(err, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace qwb::cli
