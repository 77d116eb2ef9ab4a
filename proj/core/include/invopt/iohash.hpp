#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace invopt {

// SHA-1 of a byte buffer, lowercase hex.
std::string sha1_hex(const void* data, std::size_t len);
std::string sha1_hex(const std::string& s);

// Git-style blob hash: sha1("blob <len>\0" + bytes).
std::string content_hash(const std::string& bytes);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);
std::string content_hash_file(const std::string& path);

}  // namespace invopt
