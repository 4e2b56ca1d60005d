#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace seisfeat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point shared by the executable and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Flat `key = value` file; '#' starts a comment. Throws on malformed lines.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace seisfeat::cli
