#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace treerules {

std::string read_file(const std::filesystem::path& path);

/// Writes `content` to a temporary sibling file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace treerules
