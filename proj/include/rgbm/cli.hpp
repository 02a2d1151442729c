#pragma once

#include <string>
#include <vector>

namespace rgbm {

// Full argv (program name first). Returns the process exit code: 0 success,
// 2 for usage and infeasibility errors, 1 otherwise; failures print one
// machine-readable line `error code=<slug> msg="..."` to stderr.
int run_command(const std::vector<std::string>& argv);

}  // namespace rgbm
