#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cellmix/error.hpp"
#include "cellmix/shuffle.hpp"
#include "cellmix/tensor.hpp"

namespace cellmix {

// Tensor batch file (TBF), little-endian throughout:
//   magic   "CMIX"            4 bytes
//   version u16 = 1
//   kind    u8                0 images, 1 labels, 2 soft labels, 3 provenance
//   ndim    u8                constrained by kind (4, 1, 2, 2)
//   dims    ndim x u32
//   payload row-major         f32 for kinds 0/2, u32 for kinds 1/3

enum class TbfKind : std::uint8_t {
  Images = 0,
  Labels = 1,
  SoftLabels = 2,
  Provenance = 3,
};

inline std::string to_string(TbfKind kind) {
  switch (kind) {
    case TbfKind::Images: return "images";
    case TbfKind::Labels: return "labels";
    case TbfKind::SoftLabels: return "soft_labels";
    case TbfKind::Provenance: return "provenance";
  }
  return "unknown";
}

inline int expected_ndim(TbfKind kind) {
  switch (kind) {
    case TbfKind::Images: return 4;
    case TbfKind::Labels: return 1;
    case TbfKind::SoftLabels: return 2;
    case TbfKind::Provenance: return 2;
  }
  return -1;
}

/// Parsed contents of a TBF file; exactly one payload vector is used,
/// selected by the kind.
struct TbfFile {
  TbfKind kind = TbfKind::Images;
  std::vector<std::uint32_t> dims;
  std::vector<float> f32;
  std::vector<std::uint32_t> u32;

  bool is_float() const { return kind == TbfKind::Images || kind == TbfKind::SoftLabels; }

  std::uint64_t element_count() const {
    std::uint64_t product = 1;
    for (auto d : dims) {
      product *= d;
    }
    return product;
  }
};

namespace detail {

inline constexpr char kTbfMagic[4] = {'C', 'M', 'I', 'X'};
inline constexpr std::uint16_t kTbfVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "TBF serialization assumes a little-endian host");

inline void append_u16(std::string &out, std::uint16_t value) {
  out.push_back(static_cast<char>(value & 0xFF));
  out.push_back(static_cast<char>((value >> 8) & 0xFF));
}

inline void append_u32(std::string &out, std::uint32_t value) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((value >> shift) & 0xFF));
  }
}

/// Writes bytes to `path + ".tmp"` then renames over the target.
inline void atomic_write(const std::string &path, const std::string &bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError("cannot open '" + tmp + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw FormatError("short write to '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw FormatError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

}  // namespace detail

inline void write_tbf(const std::string &path, const TbfFile &file) {
  const int ndim = expected_ndim(file.kind);
  if (ndim < 0 || static_cast<int>(file.dims.size()) != ndim) {
    throw DomainError("write_tbf: kind " + to_string(file.kind) + " requires " +
                      std::to_string(ndim) + " dims, got " + std::to_string(file.dims.size()));
  }
  const std::uint64_t elements = file.element_count();
  const std::size_t actual = file.is_float() ? file.f32.size() : file.u32.size();
  if (actual != elements) {
    throw DomainError("write_tbf: payload has " + std::to_string(actual) +
                      " elements, dims require " + std::to_string(elements));
  }

  std::string bytes;
  bytes.reserve(12 + file.dims.size() * 4 + elements * 4);
  bytes.append(detail::kTbfMagic, 4);
  detail::append_u16(bytes, detail::kTbfVersion);
  bytes.push_back(static_cast<char>(file.kind));
  bytes.push_back(static_cast<char>(file.dims.size()));
  for (auto d : file.dims) {
    detail::append_u32(bytes, d);
  }
  const std::size_t payload_bytes = static_cast<std::size_t>(elements) * 4;
  const char *payload = file.is_float() ? reinterpret_cast<const char *>(file.f32.data())
                                        : reinterpret_cast<const char *>(file.u32.data());
  bytes.append(payload, payload_bytes);
  detail::atomic_write(path, bytes);
}

inline TbfFile read_tbf(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open '" + path + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto need = [&](std::size_t count, const char *what) {
    if (bytes.size() - pos < count) {
      throw FormatError("'" + path + "': truncated " + what);
    }
  };

  need(4, "header (magic)");
  if (std::memcmp(bytes.data(), detail::kTbfMagic, 4) != 0) {
    throw FormatError("'" + path + "': bad magic, not a TBF file");
  }
  pos = 4;

  need(2, "header (version)");
  const std::uint16_t version = static_cast<std::uint8_t>(bytes[pos]) |
                                (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[pos + 1])) << 8);
  pos += 2;
  if (version != detail::kTbfVersion) {
    throw FormatError("'" + path + "': unsupported version " + std::to_string(version));
  }

  need(2, "header (kind/ndim)");
  const auto kind_raw = static_cast<std::uint8_t>(bytes[pos++]);
  const auto ndim = static_cast<std::uint8_t>(bytes[pos++]);
  if (kind_raw > 3) {
    throw FormatError("'" + path + "': unknown kind " + std::to_string(kind_raw));
  }
  const auto kind = static_cast<TbfKind>(kind_raw);
  if (ndim != expected_ndim(kind)) {
    throw FormatError("'" + path + "': kind/ndim mismatch: kind " + to_string(kind) +
                      " requires " + std::to_string(expected_ndim(kind)) + " dims, header says " +
                      std::to_string(ndim));
  }

  TbfFile file;
  file.kind = kind;
  file.dims.resize(ndim);
  for (int i = 0; i < ndim; ++i) {
    need(4, "header (dims)");
    std::uint32_t d = 0;
    for (int shift = 0; shift < 32; shift += 8) {
      d |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[pos++])) << shift;
    }
    if (d == 0) {
      throw FormatError("'" + path + "': zero dimension");
    }
    file.dims[static_cast<std::size_t>(i)] = d;
  }

  const std::uint64_t elements = file.element_count();
  const std::uint64_t payload_bytes = elements * 4;
  if (bytes.size() - pos < payload_bytes) {
    throw FormatError("'" + path + "': truncated payload: dims require " +
                      std::to_string(payload_bytes) + " bytes, " +
                      std::to_string(bytes.size() - pos) + " present");
  }
  if (bytes.size() - pos > payload_bytes) {
    throw FormatError("'" + path + "': trailing bytes after payload");
  }

  if (file.is_float()) {
    file.f32.resize(elements);
    std::memcpy(file.f32.data(), bytes.data() + pos, payload_bytes);
  } else {
    file.u32.resize(elements);
    std::memcpy(file.u32.data(), bytes.data() + pos, payload_bytes);
  }
  return file;
}

// Typed bridges between TBF contents and the domain types.

inline void write_tbf(const std::string &path, const ImageBatch &batch) {
  TbfFile file;
  file.kind = TbfKind::Images;
  file.dims = {static_cast<std::uint32_t>(batch.batch()),
               static_cast<std::uint32_t>(batch.channels()),
               static_cast<std::uint32_t>(batch.height()),
               static_cast<std::uint32_t>(batch.width())};
  file.f32.assign(batch.data().begin(), batch.data().end());
  write_tbf(path, file);
}

inline void write_tbf(const std::string &path, const LabelBatch &labels) {
  TbfFile file;
  file.kind = TbfKind::Labels;
  file.dims = {static_cast<std::uint32_t>(labels.batch())};
  file.u32 = labels.labels;
  write_tbf(path, file);
}

inline void write_tbf(const std::string &path, const SoftLabelBatch &labels) {
  TbfFile file;
  file.kind = TbfKind::SoftLabels;
  file.dims = {static_cast<std::uint32_t>(labels.batch()),
               static_cast<std::uint32_t>(labels.num_classes())};
  file.f32.assign(labels.data().begin(), labels.data().end());
  write_tbf(path, file);
}

inline void write_tbf(const std::string &path, const Provenance &provenance) {
  TbfFile file;
  file.kind = TbfKind::Provenance;
  file.dims = {static_cast<std::uint32_t>(provenance.batch()),
               static_cast<std::uint32_t>(provenance.patches())};
  file.u32.assign(provenance.data().begin(), provenance.data().end());
  write_tbf(path, file);
}

inline ImageBatch as_image_batch(const TbfFile &file) {
  if (file.kind != TbfKind::Images) {
    throw DomainError("expected an images TBF, got kind " + to_string(file.kind));
  }
  return ImageBatch(static_cast<int>(file.dims[0]), static_cast<int>(file.dims[1]),
                    static_cast<int>(file.dims[2]), static_cast<int>(file.dims[3]), file.f32);
}

/// Raw label values; pair with a class count to build a LabelBatch.
inline std::vector<std::uint32_t> as_raw_labels(const TbfFile &file) {
  if (file.kind != TbfKind::Labels) {
    throw DomainError("expected a labels TBF, got kind " + to_string(file.kind));
  }
  return file.u32;
}

inline SoftLabelBatch as_soft_labels(const TbfFile &file) {
  if (file.kind != TbfKind::SoftLabels) {
    throw DomainError("expected a soft labels TBF, got kind " + to_string(file.kind));
  }
  SoftLabelBatch out(static_cast<int>(file.dims[0]), static_cast<int>(file.dims[1]));
  std::copy(file.f32.begin(), file.f32.end(), out.data().begin());
  return out;
}

inline Provenance as_provenance(const TbfFile &file) {
  if (file.kind != TbfKind::Provenance) {
    throw DomainError("expected a provenance TBF, got kind " + to_string(file.kind));
  }
  Provenance out(static_cast<int>(file.dims[0]), static_cast<int>(file.dims[1]));
  for (int s = 0; s < out.batch(); ++s) {
    for (int i = 0; i < out.patches(); ++i) {
      out.at(s, i) = file.u32[static_cast<std::size_t>(s) * out.patches() + i];
    }
  }
  return out;
}

}  // namespace cellmix
