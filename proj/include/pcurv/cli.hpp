#ifndef PCURV_CLI_HPP
#define PCURV_CLI_HPP

#include <string>
#include <vector>

namespace pcurv {

// Runs the command-line interface; returns the process exit code.
// 0 = positive verdict, 2 = negative certificate, 3 = input error,
// 4 = numeric failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace pcurv

#endif
