#pragma once

#include <string>
#include <vector>

namespace efx {

// Full command-line front end; returns the process exit code.
// 0 pass, 1 certificate failure, 2 bad input, 3 internal diagnostic.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace efx
