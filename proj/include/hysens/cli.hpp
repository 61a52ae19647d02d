#pragma once

#include <iosfwd>

namespace hysens {

/// Entry point of the hysens command-line tool. Returns 0 on success, 2 on
/// validation errors (bad flags, config, model or cost) and 1 on numerical
/// failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hysens
