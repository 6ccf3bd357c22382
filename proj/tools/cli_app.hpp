#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace landrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitApiError = 3;
inline constexpr int kExitVerification = 4;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace landrec::cli
