#pragma once

#include <iosfwd>

namespace logitype {

/// Runs one command line. Exit codes: 0 success, 2 configuration error,
/// 3 data error, 4 estimation failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace logitype
