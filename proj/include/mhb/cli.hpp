#pragma once

#include <ostream>

namespace mhb::cli {

/// Entry point of the `mhb` tool. Results go to `out` as JSON; failures go
/// to `err` as {"error", "module", "message"} with a nonzero return.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace mhb::cli
