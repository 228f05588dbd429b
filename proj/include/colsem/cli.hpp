#pragma once

#include <iosfwd>

namespace colsem::cli {

/// Exit codes: 0 success, 1 usage error, 2 input error, 3 counterexample found.
/// Payload goes to `out`; diagnostics go to `err` as `error: ...` lines.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace colsem::cli
