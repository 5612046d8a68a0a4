#pragma once

#include <string>
#include <vector>

namespace fewvec {

// Entry point behind the command-line binary. `args` excludes argv[0].
// Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
int run_cli(const std::vector<std::string>& args);

// Static method/task compatibility rules, exposed for validation:
//   - purely form-based methods never run on the chimera tasks;
//   - the stem method never runs on the filtered tasks.
// Returns every violated rule, not just the first.
std::vector<std::string> validate_method_task(const std::string& method,
                                              const std::string& task);

const std::vector<std::string>& task_ids();

}  // namespace fewvec
