// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace qbc::oracle {

struct ChildResult {
  int exit_code = -1;  // -1 when killed or not exited normally
  int signal = 0;      // terminating signal, 0 if none
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs argv[0] (looked up on PATH) with `input` on its standard input,
/// which is then closed. Collects stdout and stderr until the child exits or
/// `timeout` elapses, in which case it is killed. Throws OracleError when the
/// program cannot be started.
ChildResult run_child(const std::vector<std::string>& argv,
                      const std::string& input,
                      std::chrono::milliseconds timeout);

/// Whitespace-separated words; single and double quotes group words and
/// backslash escapes the next character. ConfigError on an unterminated
/// quote.
std::vector<std::string> split_command_line(const std::string& line);

/// Inverse of split_command_line for display and config echo.
std::string join_command_line(const std::vector<std::string>& argv);

}  // namespace qbc::oracle
