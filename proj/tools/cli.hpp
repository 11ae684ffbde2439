#pragma once

#include <string>
#include <vector>

namespace cotkit {

/// Entry point of the `cotkit` tool. Returns 0 on success, 1 for invalid
/// input or configuration, 2 for runtime failures.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace cotkit
