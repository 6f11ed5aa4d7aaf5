#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iai::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. Results go to `out` (or the --out file), diagnostics
// and the run log to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace iai::cli
