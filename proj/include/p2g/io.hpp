#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace p2g {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> split_csv_line(std::string_view line);

/// Parses the whole string as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Hex digest of git's blob hash (`sha1("blob <size>\0" + contents)`).
std::string git_blob_hash(std::string_view contents);

}  // namespace p2g
