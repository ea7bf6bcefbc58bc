#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace valvenet {

/// Ordered `key = value` entries of a structured-text document.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses UTF-8 `key = value` lines. Blank lines and lines starting with '#'
/// are ignored; whitespace around keys and values is trimmed. Duplicate keys
/// and lines without '=' throw ConfigError with the line number.
KeyValues parse_key_values(std::string_view text);

std::string format_key_values(const KeyValues& entries);

std::vector<int> parse_int_list(std::string_view text);
std::string format_int_list(const std::vector<int>& values);
int parse_int(std::string_view text, std::string_view key);
double parse_double(std::string_view text, std::string_view key);

}  // namespace valvenet
