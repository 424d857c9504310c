#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace jitvc {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

struct ProcessOptions {
    std::filesystem::path cwd;
    std::string input;
    // Appended to (and overriding) the inherited environment.
    std::vector<std::pair<std::string, std::string>> env;
};

// Runs argv[0] (PATH lookup) without a shell. Throws Error(Io) only when the
// process cannot be spawned; a non-zero exit is reported in the result.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

}  // namespace jitvc
