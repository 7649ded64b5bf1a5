#pragma once

#include <string>

namespace tabgap {

struct SubprocessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

/// Runs `command` through /bin/sh -c, writes `input` to its stdin, captures
/// stdout and stderr. The child is killed when `timeout_seconds` elapses.
SubprocessResult run_with_input(const std::string& command, const std::string& input,
                                double timeout_seconds);

}  // namespace tabgap
