#pragma once

#include <string>

namespace abr {

// Shortest decimal form that parses back to the same 64-bit value.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Creates missing parent directories of path.
void ensure_parent_dirs(const std::string& path);
void ensure_dir(const std::string& path);

// Prefixes relative paths with the ABR_OUT_DIR environment variable when set.
std::string resolve_out_path(const std::string& path);

}  // namespace abr
