#ifndef SADIH_ENCODER_HPP_
#define SADIH_ENCODER_HPP_

// Out-of-sample hashing b = sgn(P1 phi(x)) and packed code storage.
//
// Packed layout: each code occupies ceil(l / 64) u64 words; bit b of word w
// holds code position 64 w + b, set for +1. Unused high bits are zero.
// "SDC1" code files: magic, u32 LE l, u32 LE n, then the words LE.

#include <cstdint>
#include <span>
#include <vector>

#include "sadih/binary_io.hpp"
#include "sadih/model.hpp"
#include "sadih/types.hpp"

namespace sadih {

inline constexpr char kCodeMagic[4] = {'S', 'D', 'C', '1'};

inline HashCodeMatrix encode(const Model& model, const FeatureMatrix& raw) {
  if (raw.cols() == 0) throw DataError("no samples to encode");
  return sign_codes(model.params.p1 * model.transform(raw));
}

class PackedCodes {
 public:
  PackedCodes() = default;
  PackedCodes(int bits, Index count)
      : bits_(bits), count_(count), words_(words_for(bits) * static_cast<std::size_t>(count), 0) {
    if (bits < 1) throw DataError("code length must be at least 1");
  }
  PackedCodes(int bits, Index count, std::vector<std::uint64_t> words)
      : bits_(bits), count_(count), words_(std::move(words)) {
    if (bits < 1) throw DataError("code length must be at least 1");
    if (words_.size() != words_for(bits) * static_cast<std::size_t>(count)) {
      throw DataError("packed code buffer has " + std::to_string(words_.size()) +
                      " words, expected " +
                      std::to_string(words_for(bits) * static_cast<std::size_t>(count)));
    }
    const std::uint64_t tail = tail_mask();
    for (Index i = 0; i < count; ++i) {
      if (code(i).back() & ~tail) {
        throw DataError("packed code " + std::to_string(i) + " has nonzero unused bits");
      }
    }
  }

  static std::size_t words_for(int bits) { return (static_cast<std::size_t>(bits) + 63) / 64; }

  int bits() const { return bits_; }
  Index size() const { return count_; }
  std::size_t words_per_code() const { return words_for(bits_); }
  const std::vector<std::uint64_t>& words() const { return words_; }

  std::span<const std::uint64_t> code(Index i) const {
    return {words_.data() + static_cast<std::size_t>(i) * words_per_code(), words_per_code()};
  }
  std::span<std::uint64_t> code(Index i) {
    return {words_.data() + static_cast<std::size_t>(i) * words_per_code(), words_per_code()};
  }

  std::uint64_t tail_mask() const {
    const int used = bits_ % 64;
    return used == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
  }

 private:
  int bits_ = 0;
  Index count_ = 0;
  std::vector<std::uint64_t> words_;
};

inline PackedCodes pack(const HashCodeMatrix& codes) {
  if (!is_binary_codes(codes)) throw DataError("code matrix has entries other than -1/+1");
  PackedCodes packed(static_cast<int>(codes.rows()), codes.cols());
  for (Index i = 0; i < codes.cols(); ++i) {
    auto words = packed.code(i);
    for (Index b = 0; b < codes.rows(); ++b) {
      if (codes(b, i) > 0) words[static_cast<std::size_t>(b / 64)] |= std::uint64_t{1} << (b % 64);
    }
  }
  return packed;
}

inline HashCodeMatrix unpack(const PackedCodes& packed) {
  HashCodeMatrix codes(packed.bits(), packed.size());
  for (Index i = 0; i < packed.size(); ++i) {
    const auto words = packed.code(i);
    for (Index b = 0; b < packed.bits(); ++b) {
      codes(b, i) = (words[static_cast<std::size_t>(b / 64)] >> (b % 64)) & 1u ? 1.0 : -1.0;
    }
  }
  return codes;
}

inline std::vector<unsigned char> serialize_codes(const PackedCodes& packed) {
  io::ByteWriter out;
  out.raw(kCodeMagic, 4);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(packed.bits()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(packed.size()));
  for (std::uint64_t w : packed.words()) out.put(w);
  return out.bytes();
}

inline PackedCodes parse_codes(const std::vector<unsigned char>& bytes,
                               const std::string& source = "<memory>") {
  io::ByteReader in(bytes.data(), bytes.size(), source);
  in.expect_magic(kCodeMagic);
  const auto bits = in.get<std::uint32_t>("code length");
  const auto count = in.get<std::uint32_t>("code count");
  if (bits == 0) throw DataError(source + ": code length is zero");
  const std::size_t total = PackedCodes::words_for(static_cast<int>(bits)) * count;
  if (in.remaining() != 8 * total) {
    throw DataError(source + ": expected " + std::to_string(8 * total) + " payload bytes, found " +
                    std::to_string(in.remaining()));
  }
  std::vector<std::uint64_t> words(total);
  for (auto& w : words) w = in.get<std::uint64_t>("code words");
  return PackedCodes(static_cast<int>(bits), count, std::move(words));
}

inline void save_codes(const std::string& path, const PackedCodes& packed) {
  io::write_file(path, serialize_codes(packed));
}

inline PackedCodes load_codes(const std::string& path) {
  return parse_codes(io::read_file(path), path);
}

}  // namespace sadih

#endif  // SADIH_ENCODER_HPP_
