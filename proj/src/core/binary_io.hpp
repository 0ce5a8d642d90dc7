// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "core/error.hpp"

namespace mssde {

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

/// Little-endian binary output.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path) : os_(path, std::ios::binary | std::ios::trunc) {
    if (!os_) throw DataError("cannot open '" + path + "' for writing");
  }
  template <class T>
  void put(T v) {
    v = to_le(v);
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void raw(const char* p, std::size_t n) { os_.write(p, static_cast<std::streamsize>(n)); }
  void finish(const std::string& path) {
    os_.flush();
    if (!os_) throw DataError("write to '" + path + "' failed");
  }

 private:
  std::ofstream os_;
};

/// Little-endian binary input; short reads throw DataError naming the field.
class BinaryReader {
 public:
  BinaryReader(const std::string& path, std::string kind) : path_(path), kind_(std::move(kind)), is_(path, std::ios::binary) {
    if (!is_) throw DataError("cannot open " + kind_ + " '" + path + "'");
  }
  template <class T>
  T get(const char* what) {
    T v;
    raw(reinterpret_cast<char*>(&v), sizeof(T), what);
    return to_le(v);
  }
  void raw(char* p, std::size_t n, const char* what) {
    is_.read(p, static_cast<std::streamsize>(n));
    if (is_.gcount() != static_cast<std::streamsize>(n)) {
      throw DataError(kind_ + " '" + path_ + "' truncated while reading " + what);
    }
  }
  bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }

 private:
  std::string path_, kind_;
  std::ifstream is_;
};

}  // namespace mssde
