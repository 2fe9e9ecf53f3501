#pragma once
// Entry point of the mmvlab command-line tool, callable in-process.
//
// Exit codes: 0 success, 1 invalid input, 2 verification failure,
// 3 internal cross-check failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace mmv::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_invalid_input = 1,
    exit_verification_failed = 2,
    exit_cross_check_failed = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmv::cli
