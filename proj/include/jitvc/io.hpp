#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jitvc::io {

std::string read_text(const std::filesystem::path& path);
// Creates parent directories; writes through a temporary file and renames.
void write_text(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_lines(std::string_view text);

// Shortest decimal that round-trips the double; stable across runs.
std::string format_double(double value);

}  // namespace jitvc::io
