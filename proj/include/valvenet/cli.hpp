#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace valvenet {

/// Entry point of the `valvenet` tool. `args` excludes the program name.
/// Returns 0 on success; otherwise prints usage or a one-line diagnostic to
/// `err` and returns nonzero.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace valvenet
