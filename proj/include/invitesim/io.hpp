#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace invitesim {

/// Shortest round-trip decimal form; identical input gives identical text.
std::string format_number(double value);

/// CRC-32 of a file's bytes as 8 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Writes text to path, creating parent directories. Throws OutputDirUnwritable on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace invitesim
