#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "gapfair/errors.hpp"

// Little-endian binary file helpers for the GFEM/GFLM/GFPJ formats.

namespace gapfair::binio {

static_assert(std::endian::native == std::endian::little,
              "binary file formats assume a little-endian host");

inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint64_t read_u64(std::istream& is, const std::string& what) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw DataError("truncated file while reading " + what);
  return v;
}

inline float read_f32(std::istream& is, const std::string& what) {
  float v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw DataError("truncated file while reading " + what);
  return v;
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const std::string& path) {
  char got[4] = {0, 0, 0, 0};
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0) {
    throw DataError(path + ": bad magic, expected " + std::string(magic, 4));
  }
}

}  // namespace gapfair::binio
