#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>

namespace lens {

/// Shortest text for a double that round-trips: 17 significant digits.
std::string format17(double v);

/// Comma-separated row of doubles at 17 significant digits.
void write_csv_row(std::ostream& os, std::initializer_list<double> values);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lens
