#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "vesselkit/linalg.hpp"

namespace vesselkit::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_verify_failed = 1,
    exit_validation = 2,
    exit_singular = 3,
    exit_runtime_guard = 4,
};

/// "a+bi", "-2.5i", "i", "3", "√2", "sqrt(2)-i". Throws ValidationError.
cplx parse_complex(const std::string& text);

/// Comma-separated list; empty items are errors.
std::vector<std::string> split_list(const std::string& text);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vesselkit::cli
