#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace refract {

/// Exit codes: 0 success, 1 validation failure, 2 configuration or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// Applies REFRACT_THREADS (if set) as the OpenMP thread cap.
void apply_thread_limit();

}  // namespace refract
