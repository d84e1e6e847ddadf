#pragma once

#include <string>

namespace scrip {

// Full command-line front end. Returns the process exit status: 0 success,
// 1 domain error (the error name is echoed to stderr), 2 usage error.
int parse_and_dispatch(int argc, const char* const* argv);

// Runs every experiment in the manifest ({"experiments": [{"name", "argv"}]})
// through parse_and_dispatch, isolating failures, and writes a JSON index of
// per-experiment statuses. Returns 0 once the index is written.
int run_experiment_suite(const std::string& manifest_path, const std::string& index_path);

}  // namespace scrip
