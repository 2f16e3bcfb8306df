#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dde::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kIoError = 3;

// Runs the dde_elites command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dde::cli
