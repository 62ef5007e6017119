#ifndef SADIH_MODEL_HPP_
#define SADIH_MODEL_HPP_

// A trained hashing model and its "SDH1" file format:
//
//   "SDH1" | u16 version | u32 d | u32 c | u32 l
//   W (c x l) | P1 (l x d) | P2 (d x l)          f64, column-major
//   mean[d] | scale[d]                           f64
//   u8 has_anchors [ u32 d_raw | u32 m | anchors (d_raw x m) | f64 sigma ]
//   f64 alpha | f64 beta | f64 gamma | u32 bits | u8 variant | u32 iters
//   | u64 seed | f64 tolerance
//   u32 CRC-32 of every preceding byte
//
// All integers little-endian. With anchors, m equals d: features are
// anchor-embedded first and the normalization acts on the embedding.

#include <optional>
#include <zlib.h>

#include "sadih/binary_io.hpp"
#include "sadih/dataset.hpp"
#include "sadih/optimizer.hpp"

namespace sadih {

inline constexpr char kModelMagic[4] = {'S', 'D', 'H', '1'};
inline constexpr std::uint16_t kModelVersion = 1;

struct Model {
  ModelParams params;
  NormalizationStats stats;
  std::optional<AnchorSet> anchors;
  Hyperparams hyper;

  Index feature_dim() const { return params.p1.cols(); }
  Index raw_dim() const { return anchors ? anchors->anchors.rows() : feature_dim(); }
  int bits() const { return static_cast<int>(params.p1.rows()); }
  int num_classes() const { return static_cast<int>(params.w.rows()); }

  // Raw input to the space the encoder acts on.
  FeatureMatrix transform(const FeatureMatrix& raw) const {
    if (raw.rows() != raw_dim()) {
      throw DataError("query dimension " + std::to_string(raw.rows()) +
                      " does not match model input dimension " + std::to_string(raw_dim()));
    }
    return apply_normalization(anchors ? anchor_embed(raw, *anchors) : raw, stats);
  }
};

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths.
  while (size > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::vector<unsigned char> serialize_model(const Model& model) {
  const auto& p = model.params;
  const Index d = p.p1.cols();
  const Index c = p.w.rows();
  const Index l = p.w.cols();
  if (p.p1.rows() != l || p.p2.rows() != d || p.p2.cols() != l || model.stats.mean.size() != d ||
      model.stats.scale.size() != d) {
    throw DataError("inconsistent model dimensions");
  }
  io::ByteWriter out;
  out.raw(kModelMagic, 4);
  out.put<std::uint16_t>(kModelVersion);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(c));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(l));
  out.put_matrix(p.w);
  out.put_matrix(p.p1);
  out.put_matrix(p.p2);
  out.put_matrix(model.stats.mean);
  out.put_matrix(model.stats.scale);
  out.put<std::uint8_t>(model.anchors ? 1 : 0);
  if (model.anchors) {
    out.put<std::uint32_t>(static_cast<std::uint32_t>(model.anchors->anchors.rows()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(model.anchors->anchors.cols()));
    out.put_matrix(model.anchors->anchors);
    out.put_f64(model.anchors->sigma);
  }
  const Hyperparams& h = model.hyper;
  out.put_f64(h.alpha);
  out.put_f64(h.beta);
  out.put_f64(h.gamma);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(h.bits));
  out.put<std::uint8_t>(h.variant == Variant::kL1 ? 1 : 0);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(h.max_iters));
  out.put<std::uint64_t>(h.seed);
  out.put_f64(h.tolerance);
  out.put<std::uint32_t>(crc32_of(out.bytes().data(), out.bytes().size()));
  return out.bytes();
}

inline Model parse_model(const std::vector<unsigned char>& bytes,
                         const std::string& source = "<memory>") {
  if (bytes.size() < 4) throw DataError(source + ": too short for a model file");
  const std::size_t body = bytes.size() - 4;
  io::ByteReader crc_reader(bytes.data() + body, 4, source);
  const auto stored = crc_reader.get<std::uint32_t>("checksum");
  if (stored != crc32_of(bytes.data(), body)) {
    throw DataError(source + ": CRC-32 mismatch, model file is corrupt");
  }
  io::ByteReader in(bytes.data(), body, source);
  in.expect_magic(kModelMagic);
  const auto version = in.get<std::uint16_t>("version");
  if (version != kModelVersion) {
    throw DataError(source + ": unsupported model version " + std::to_string(version));
  }
  const Index d = in.get<std::uint32_t>("d");
  const Index c = in.get<std::uint32_t>("c");
  const Index l = in.get<std::uint32_t>("l");
  if (d == 0 || c == 0 || l == 0 || l > d) {
    throw DataError(source + ": invalid model dimensions");
  }
  Model model;
  model.params.w = in.get_matrix(c, l, "W");
  model.params.p1 = in.get_matrix(l, d, "P1");
  model.params.p2 = in.get_matrix(d, l, "P2");
  model.stats.mean = in.get_matrix(d, 1, "mean");
  model.stats.scale = in.get_matrix(d, 1, "scale");
  const auto has_anchors = in.get<std::uint8_t>("anchor flag");
  if (has_anchors > 1) throw DataError(source + ": invalid anchor flag");
  if (has_anchors == 1) {
    AnchorSet anchors;
    const Index d_raw = in.get<std::uint32_t>("anchor dimension");
    const Index m = in.get<std::uint32_t>("anchor count");
    if (m != d || d_raw == 0) throw DataError(source + ": anchor count must equal d");
    anchors.anchors = in.get_matrix(d_raw, m, "anchors");
    anchors.sigma = in.get_f64("sigma");
    model.anchors = std::move(anchors);
  }
  Hyperparams& h = model.hyper;
  h.alpha = in.get_f64("alpha");
  h.beta = in.get_f64("beta");
  h.gamma = in.get_f64("gamma");
  h.bits = static_cast<int>(in.get<std::uint32_t>("bits"));
  h.variant = in.get<std::uint8_t>("variant") == 1 ? Variant::kL1 : Variant::kL21;
  h.max_iters = static_cast<int>(in.get<std::uint32_t>("iters"));
  h.seed = in.get<std::uint64_t>("seed");
  h.tolerance = in.get_f64("tolerance");
  if (in.remaining() != 0) throw DataError(source + ": trailing bytes in model file");
  return model;
}

inline void save_model(const std::string& path, const Model& model) {
  io::write_file(path, serialize_model(model));
}

inline Model load_model(const std::string& path) { return parse_model(io::read_file(path), path); }

}  // namespace sadih

#endif  // SADIH_MODEL_HPP_
