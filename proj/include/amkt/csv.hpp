#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace amkt {

/// File-system failure with the path in the message.
class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(path.string() + ": " + what) {}
};

/// Shortest-safe round-trip text for a double (17 significant digits).
[[nodiscard]] std::string format_double(double x);

/// Strict parse of a whole field; throws std::invalid_argument.
[[nodiscard]] double parse_double(std::string_view field);
[[nodiscard]] std::int64_t parse_int(std::string_view field);
[[nodiscard]] std::uint64_t parse_uint(std::string_view field);

[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace amkt
