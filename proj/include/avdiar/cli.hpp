#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace avdiar {

// Runs one toolkit invocation: args is argv without the program name, e.g.
// {"score", "--ref", "ref.rttm", "--hyp", "hyp.rttm"}. Normal output goes to
// `out`, diagnostics to `err`. Returns the process exit code: 0 on success,
// 1 on a usage error, 2 on a data or I/O error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace avdiar
