#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace lsldg::cli {

/// Entry point used by main() and the tests. Exit codes: 0 success,
/// 1 usage/config error, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

int run(int argc, char** argv);

}  // namespace lsldg::cli
