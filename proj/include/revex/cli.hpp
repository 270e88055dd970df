#pragma once

#include <string>
#include <vector>

namespace revex {

// Full command-line entry point. Returns 0 on success, 2 on usage errors,
// 1 on runtime failures. args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace revex
