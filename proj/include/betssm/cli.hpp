#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace betssm {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

// Runs one command. args excludes the program name. Errors are reported as
// a JSON object on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

// 64-bit FNV-1a, hex encoded; used for config hashes in output headers.
std::string fnv1a_hex(const std::string& text);

}  // namespace betssm
