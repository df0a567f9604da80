#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cforge {

std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written artifact. Throws IoError.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cforge
