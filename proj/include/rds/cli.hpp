#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rds {

/// Exit codes: 0 success, 1 runtime failure, 2 configuration or domain
/// error, 3 selftest tolerance failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace rds
