#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace llmsast {

/// Whole-file read in binary mode. Throws ConfigError when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace llmsast
