#pragma once

#include <string>
#include <vector>

namespace hybridgaze::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `hybridgaze` tool; returns the process exit code.
int run(int argc, char** argv);

/// Same as above with argv[0] omitted.
int run(const std::vector<std::string>& args);

} // namespace hybridgaze::cli
