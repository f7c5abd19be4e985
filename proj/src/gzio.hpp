#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace autonet::detail {

bool looks_gzipped(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::string& path);

// Reads the file, inflating transparently when it is gzip-compressed.
std::vector<std::uint8_t> read_file_maybe_gz(const std::string& path);

void write_file(const std::string& path, const void* data, std::size_t n);

// Writes a gzip stream with a zeroed mtime so identical input produces
// byte-identical files across runs.
void write_file_gz(const std::string& path, const void* data, std::size_t n);

}  // namespace autonet::detail
