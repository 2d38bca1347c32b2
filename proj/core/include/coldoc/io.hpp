#pragma once

#include <cstdint>
#include <string>

namespace coldoc {

/// Writes content to path via a temp file in the same directory plus an
/// atomic rename, so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // data_error when unreadable

/// FNV-1a 64-bit content hash, hex encoded. Used for run manifests.
std::string file_hash_hex(const std::string& path);

}  // namespace coldoc
