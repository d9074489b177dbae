#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kema::cli {

// Exit code for command-line usage errors; error classes map to 2..5.
inline constexpr int kUsageExit = 1;

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace kema::cli
