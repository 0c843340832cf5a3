#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mqg::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_io = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* output_dir_env = "MQG_OUTPUT_DIR";

/// Runs one command line (without the program name). Data files go to disk,
/// `out` receives --dump-config and --help text, `err` receives diagnostics.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace mqg::cli
