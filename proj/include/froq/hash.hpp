#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace froq {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lower-case hex SHA-256 of a file's contents. Throws IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Whole-file read. Throws IoError when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Whole-file write (truncating). Throws IoError when the path is unwritable.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace froq
