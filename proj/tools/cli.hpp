#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace codimctl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (program name excluded). Result JSON goes to `--out` when given and to
/// `out` otherwise; errors are written to `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace codimctl::cli
