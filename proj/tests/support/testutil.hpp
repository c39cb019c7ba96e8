#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"

namespace testutil {

// Runs fn expecting an exception of type E whose message contains needle.
template <typename E>
inline void check_throws_containing(const std::function<void()>& fn,
                                    const std::string& needle) {
  try {
    fn();
    FAIL_CHECK("expected an exception mentioning '" << needle
                                                    << "', none thrown");
  } catch (const E& e) {
    const std::string msg = e.what();
    if (msg.find(needle) == std::string::npos) {
      FAIL_CHECK("exception message '" << msg << "' does not mention '"
                                       << needle << "'");
    }
  } catch (const std::exception& e) {
    FAIL_CHECK("exception of the wrong type: " << e.what());
  }
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pacc_test_" + tag + "_" + std::to_string(::getpid()) +
                    "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(out), "cannot write " << p.string());
  out << content;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the built CLI with the given argument string; stdout/stderr land in
// scratch files under workdir. An env prefix like "PACC_SEED=7 " may be
// passed through `prefix`.
inline CliResult run_cli(const std::string& args,
                         const std::filesystem::path& workdir,
                         const std::string& prefix = {}) {
  static int counter = 0;
  const auto out_path = workdir / ("cli_out_" + std::to_string(counter) + ".txt");
  const auto err_path = workdir / ("cli_err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = prefix + std::string(PACC_CLI_PATH) + " " + args +
                          " >" + out_path.string() + " 2>" + err_path.string();
  const int rc = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

inline std::filesystem::path repo_path(const std::string& rel) {
  return std::filesystem::path(PACC_REPO_DIR) / rel;
}

}  // namespace testutil
