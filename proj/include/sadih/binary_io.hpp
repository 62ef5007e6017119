#ifndef SADIH_BINARY_IO_HPP_
#define SADIH_BINARY_IO_HPP_

// Little-endian byte buffers shared by the model and code file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sadih/error.hpp"
#include "sadih/types.hpp"

namespace sadih::io {

class ByteWriter {
 public:
  void raw(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + size);
  }

  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    const U u = static_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bytes_.push_back(static_cast<unsigned char>((u >> (8 * b)) & 0xffu));
    }
  }

  void put_f64(double value) { put(std::bit_cast<std::uint64_t>(value)); }

  // Column-major.
  void put_matrix(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) put_f64(m(i, j));
    }
  }

  const std::vector<unsigned char>& bytes() const { return bytes_; }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size, std::string source)
      : data_(data), size_(size), source_(std::move(source)) {}

  void need(std::size_t count, const char* what) const {
    if (size_ - offset_ < count) {
      throw DataError(source_ + ": truncated while reading " + what + " at byte offset " +
                      std::to_string(offset_));
    }
  }

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      u |= static_cast<U>(static_cast<U>(data_[offset_ + b]) << (8 * b));
    }
    offset_ += sizeof(T);
    return static_cast<T>(u);
  }

  double get_f64(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }

  Matrix get_matrix(Index rows, Index cols, const char* what) {
    need(8 * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), what);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = get_f64(what);
    }
    return m;
  }

  void expect_magic(const char (&magic)[4]) {
    need(4, "magic");
    if (std::memcmp(data_ + offset_, magic, 4) != 0) {
      throw DataError(source_ + ": bad magic, expected '" + std::string(magic, 4) + "'");
    }
    offset_ += 4;
  }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return size_ - offset_; }
  const std::string& source() const { return source_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t offset_ = 0;
  std::string source_;
};

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace sadih::io

#endif  // SADIH_BINARY_IO_HPP_
