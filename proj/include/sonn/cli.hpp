#pragma once

#include <iosfwd>

namespace sonn {

/// Entry point of the `sonn-vibe` tool. Returns 0 on success, 1 on argument
/// errors and 2 on data or format errors (or a failed self-check).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sonn
