#pragma once

#include <ostream>

namespace scsec::cli {

/// Exit codes: 0 success, 1 an invariant or game verdict failed, 2 bad
/// configuration, arguments or io.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace scsec::cli
