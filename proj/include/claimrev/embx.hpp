#pragma once

// EMBX: binary id -> float32 vector interchange format (little-endian).
//
//   magic "EMBX" | u32 version = 1 | u32 dim | u64 count | count x record
//   record = u32 id_byte_len | id (UTF-8) | dim x f32

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimrev/error.hpp"
#include "claimrev/io.hpp"

namespace claimrev {

class EmbeddingMatrix {
 public:
  struct Record {
    std::string id;
    std::vector<float> vector;

    bool operator==(const Record&) const = default;
  };

  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::uint32_t dim) : dim_(dim) {
    if (dim == 0) throw ValidationError("embedding dimension must be positive");
  }

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<Record>& records() const noexcept { return records_; }

  void add(std::string id, std::vector<float> vector) {
    if (vector.size() != dim_) {
      throw ValidationError("record '" + id + "' has " + std::to_string(vector.size()) + " values, expected " +
                            std::to_string(dim_));
    }
    for (float v : vector) {
      if (!std::isfinite(v)) throw ValidationError("record '" + id + "' holds a non-finite value");
    }
    if (index_.contains(id)) throw ValidationError("duplicate embedding id '" + id + "'");
    index_.emplace(id, records_.size());
    records_.push_back({std::move(id), std::move(vector)});
  }

  const std::vector<float>* find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records_[it->second].vector;
  }

  bool operator==(const EmbeddingMatrix& o) const { return dim_ == o.dim_ && records_ == o.records_; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<Record> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

namespace detail {

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(std::string_view bytes, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace detail

inline constexpr std::uint32_t kEmbxVersion = 1;

inline std::string encode_embx(const EmbeddingMatrix& matrix) {
  std::string out = "EMBX";
  detail::put_le<std::uint32_t>(out, kEmbxVersion);
  detail::put_le<std::uint32_t>(out, matrix.dim());
  detail::put_le<std::uint64_t>(out, matrix.size());
  for (const auto& r : matrix.records()) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.id.size()));
    out += r.id;
    for (float v : r.vector) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

inline EmbeddingMatrix decode_embx(std::string_view bytes) {
  using Unit = FormatError::Unit;
  if (bytes.size() < 4 || bytes.substr(0, 4) != "EMBX") throw FormatError("EMBX: bad magic", Unit::byte, 0);
  if (bytes.size() < 20) throw FormatError("EMBX: truncated header", Unit::byte, bytes.size());
  const auto version = detail::get_le<std::uint32_t>(bytes, 4);
  if (version != kEmbxVersion) throw FormatError("EMBX: unsupported version " + std::to_string(version), Unit::byte, 4);
  const auto dim = detail::get_le<std::uint32_t>(bytes, 8);
  if (dim == 0) throw FormatError("EMBX: dimension must be positive", Unit::byte, 8);
  const auto count = detail::get_le<std::uint64_t>(bytes, 12);
  EmbeddingMatrix matrix(dim);
  std::size_t pos = 20;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::size_t record_start = pos;
    if (bytes.size() - pos < 4) throw FormatError("EMBX: truncated record " + std::to_string(k), Unit::byte, record_start);
    const auto id_len = detail::get_le<std::uint32_t>(bytes, pos);
    pos += 4;
    if (bytes.size() - pos < static_cast<std::uint64_t>(id_len) + 4ull * dim) {
      throw FormatError("EMBX: truncated record " + std::to_string(k), Unit::byte, record_start);
    }
    std::string id(bytes.substr(pos, id_len));
    pos += id_len;
    if (matrix.find(id)) throw FormatError("EMBX: duplicate id '" + id + "'", Unit::byte, record_start);
    std::vector<float> vector(dim);
    for (std::uint32_t d = 0; d < dim; ++d, pos += 4) {
      vector[d] = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, pos));
      if (!std::isfinite(vector[d])) throw FormatError("EMBX: non-finite value in '" + id + "'", Unit::byte, pos);
    }
    matrix.add(std::move(id), std::move(vector));
  }
  if (pos != bytes.size()) throw FormatError("EMBX: trailing bytes after last record", Unit::byte, pos);
  return matrix;
}

inline void write_embx(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_embx(matrix));
}

inline EmbeddingMatrix read_embx(const std::filesystem::path& path) { return decode_embx(io::read_file(path)); }

}  // namespace claimrev
