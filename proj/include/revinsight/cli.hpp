#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace revinsight::cli {

/// Runs one command line (without the program name) and returns the process
/// exit code: 0 success, 2 configuration, 3 IO, 4 embedding backend,
/// 5 generation (every request failed). Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace revinsight::cli
