#pragma once

#include "mdyn/data_model.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mdyn::io {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Parses a full token as a double; `context` is quoted in the error message.
double parse_double(std::string_view token, const std::string& context);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Dense matrix as comma-separated rows; an optional header line goes first.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path,
                      const std::vector<std::string>& header = {});

/// Reads a numeric matrix; skips one header line when `has_header`.
Matrix read_matrix_csv(const std::filesystem::path& path, bool has_header = false);

/// Reads the first line of a file split on commas.
std::vector<std::string> read_header(const std::filesystem::path& path);

/// Flat `key = value` metadata used by model bundles; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const KeyValues& kv, const std::filesystem::path& path);
KeyValues read_key_values(const std::filesystem::path& path);
const std::string& require_key(const KeyValues& kv, const std::string& key, const std::filesystem::path& source);

}  // namespace mdyn::io
