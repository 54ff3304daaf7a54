#pragma once

#include <string>

namespace gapsoup {

// Write via temp-file-then-rename so partially written outputs are never
// observed under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Format a double with 17 significant digits (exact round trip).
std::string format_double(double v);

// FNV-1a over a string; used for config digests.
std::string hex_digest(const std::string& content);

}  // namespace gapsoup
