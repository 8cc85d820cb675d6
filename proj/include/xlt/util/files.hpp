#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace xlt::files {

/// Whole file as bytes. Throws StageDependencyMissing when absent.
std::string read(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, creating parent
/// directories as needed.
void write(const std::filesystem::path& path, std::string_view bytes);

}  // namespace xlt::files
