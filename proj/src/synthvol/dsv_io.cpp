#include "dsvit/synthvol/dsv_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dsvit::synth {

static_assert(std::endian::native == std::endian::little,
              "the .dsv writer assumes a little-endian host");

std::string to_string(const Dims& d) {
  return std::to_string(d.h) + "x" + std::to_string(d.w) + "x" + std::to_string(d.l);
}

namespace {

template <typename V>
void write_raw(std::ostream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
void read_raw(std::istream& in, V& v, const char* what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw FormatError(std::string("truncated .dsv record while reading ") + what);
}

std::size_t count_of(const std::array<std::uint32_t, 3>& dims) {
  return std::size_t{dims[0]} * dims[1] * dims[2];
}

}  // namespace

void write_dsv(std::ostream& out, DsvType type, std::array<std::uint32_t, 3> dims,
               std::span<const float> f32, std::span<const std::uint16_t> u16) {
  const std::size_t n = count_of(dims);
  if (n == 0) throw InvalidInput(".dsv dims must be positive");
  if (type == DsvType::kF32) {
    if (f32.size() != n) throw InvalidInput(".dsv payload size does not match dims");
    for (float v : f32) {
      if (!std::isfinite(v)) throw InvalidInput("refusing to write a non-finite value to .dsv");
    }
  } else if (u16.size() != n) {
    throw InvalidInput(".dsv payload size does not match dims");
  }
  out.write(kDsvMagic.data(), kDsvMagic.size());
  write_raw(out, static_cast<std::uint8_t>(type));
  for (std::uint32_t d : dims) write_raw(out, d);
  if (type == DsvType::kF32) {
    out.write(reinterpret_cast<const char*>(f32.data()), static_cast<std::streamsize>(n * 4));
  } else {
    out.write(reinterpret_cast<const char*>(u16.data()), static_cast<std::streamsize>(n * 2));
  }
  if (!out) throw IoError("failed writing .dsv record");
}

DsvRecord read_dsv(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in) throw FormatError("truncated .dsv header");
  if (magic != kDsvMagic) throw FormatError("bad .dsv magic (expected DSVVOL01)");
  std::uint8_t tag = 0;
  read_raw(in, tag, "dtype tag");
  if (tag > 1) throw FormatError("unknown .dsv dtype tag " + std::to_string(tag));
  DsvRecord rec;
  rec.type = static_cast<DsvType>(tag);
  for (auto& d : rec.dims) read_raw(in, d, "dims");
  const std::size_t n = count_of(rec.dims);
  if (n == 0) throw FormatError(".dsv record with a zero dimension");
  if (rec.type == DsvType::kF32) {
    rec.f32.resize(n);
    in.read(reinterpret_cast<char*>(rec.f32.data()), static_cast<std::streamsize>(n * 4));
  } else {
    rec.u16.resize(n);
    in.read(reinterpret_cast<char*>(rec.u16.data()), static_cast<std::streamsize>(n * 2));
  }
  if (!in) throw FormatError("truncated .dsv payload");
  return rec;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::array<std::uint32_t, 3> dims_of(const Dims& d) { return {d.h, d.w, d.l}; }

}  // namespace

void save_volume(const std::filesystem::path& path, const Volume& v) {
  if (v.values.size() != v.dims.count()) throw InvalidInput("volume size does not match dims");
  auto out = open_out(path);
  write_dsv(out, DsvType::kF32, dims_of(v.dims), v.values, {});
}

void save_volume(const std::filesystem::path& path, const SegVolume& v) {
  if (v.values.size() != v.dims.count()) throw InvalidInput("volume size does not match dims");
  auto out = open_out(path);
  write_dsv(out, DsvType::kU16, dims_of(v.dims), {}, v.values);
}

std::variant<Volume, SegVolume> load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  DsvRecord rec = read_dsv(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after .dsv payload in " + path.string());
  }
  const Dims dims{rec.dims[0], rec.dims[1], rec.dims[2]};
  if (rec.type == DsvType::kF32) {
    Volume v;
    v.dims = dims;
    v.values = std::move(rec.f32);
    return v;
  }
  SegVolume s;
  s.dims = dims;
  s.values = std::move(rec.u16);
  return s;
}

Volume load_intensity(const std::filesystem::path& path) {
  auto v = load_volume(path);
  if (!std::holds_alternative<Volume>(v)) {
    throw FormatError(path.string() + " holds labels, expected an intensity volume");
  }
  return std::get<Volume>(std::move(v));
}

SegVolume load_labels(const std::filesystem::path& path) {
  auto v = load_volume(path);
  if (!std::holds_alternative<SegVolume>(v)) {
    throw FormatError(path.string() + " holds intensities, expected a label volume");
  }
  return std::get<SegVolume>(std::move(v));
}

}  // namespace dsvit::synth
