#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dagcusum {

/// Exit codes: 0 success, 1 configuration or usage error, 2 infeasible.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace dagcusum
