#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace pluralis {

using Json = nlohmann::json;

/// Compact JSON text with every floating-point number printed using 17
/// significant digits, so values survive a write/read cycle bit-for-bit.
std::string dump_exact(const Json& doc);

/// Same as dump_exact but pretty-printed with two-space indentation.
std::string dump_exact_pretty(const Json& doc);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_exact(double x);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pluralis
