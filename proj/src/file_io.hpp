// Internal file helpers shared by the cache and the library store.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace storycast::detail {

/// Whole-file read. Throws std::runtime_error on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes `<path>.tmp-<random>` then renames it over `path`, so readers see
/// either the old or the new file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace storycast::detail
