#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace phishtriage {

/// Reads a whole file; throws Error{UnreadableFile} when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact. Throws Error{Io}.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace phishtriage
