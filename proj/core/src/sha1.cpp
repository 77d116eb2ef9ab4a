#include "invopt/iohash.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "invopt/common.hpp"

namespace invopt {

namespace {

inline std::uint32_t rol(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

struct Sha1 {
  std::array<std::uint32_t, 5> h = {0x67452301u, 0xefcdab89u, 0x98badcfeu, 0x10325476u,
                                    0xc3d2e1f0u};
  std::uint64_t total = 0;
  std::array<unsigned char, 64> block{};
  std::size_t fill = 0;

  void process(const unsigned char* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5a827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ed9eba1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8f1bbcdcu;
      } else {
        f = b ^ c ^ d;
        k = 0xca62c1d6u;
      }
      std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const unsigned char* p, std::size_t n) {
    total += n;
    while (n > 0) {
      std::size_t take = std::min(n, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == block.size()) {
        process(block.data());
        fill = 0;
      }
    }
  }

  std::string finish() {
    std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char lenb[8];
    for (int i = 0; i < 8; ++i) lenb[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(lenb, 8);
    std::ostringstream os;
    os << std::hex;
    for (std::uint32_t x : h)
      for (int i = 3; i >= 0; --i) {
        unsigned byte = (x >> (8 * i)) & 0xffu;
        os << (byte >> 4) << (byte & 0xfu);
      }
    return os.str();
  }
};

}  // namespace

std::string sha1_hex(const void* data, std::size_t len) {
  Sha1 s;
  s.update(static_cast<const unsigned char*>(data), len);
  return s.finish();
}

std::string sha1_hex(const std::string& s) { return sha1_hex(s.data(), s.size()); }

std::string content_hash(const std::string& bytes) {
  std::string header = "blob " + std::to_string(bytes.size());
  header.push_back('\0');
  Sha1 s;
  s.update(reinterpret_cast<const unsigned char*>(header.data()), header.size());
  s.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return s.finish();
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  if (f.bad()) throw IoError("read failed: " + path);
  return os.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::string content_hash_file(const std::string& path) { return content_hash(read_file_bytes(path)); }

}  // namespace invopt
