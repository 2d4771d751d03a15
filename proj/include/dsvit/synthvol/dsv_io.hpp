#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "dsvit/synthvol/volume.hpp"

// `.dsv` binary record: 8-byte magic "DSVVOL01", u8 dtype tag (0 = f32,
// 1 = u16), three little-endian u32 dims, then the little-endian row-major
// payload. Checkpoints embed the same record for each parameter tensor.
namespace dsvit::synth {

enum class DsvType : std::uint8_t { kF32 = 0, kU16 = 1 };

inline constexpr std::array<char, 8> kDsvMagic{'D', 'S', 'V', 'V', 'O', 'L', '0', '1'};

struct DsvRecord {
  DsvType type = DsvType::kF32;
  std::array<std::uint32_t, 3> dims{1, 1, 1};
  std::vector<float> f32;
  std::vector<std::uint16_t> u16;
};

// Throws InvalidInput for non-finite f32 values.
void write_dsv(std::ostream& out, DsvType type, std::array<std::uint32_t, 3> dims,
               std::span<const float> f32, std::span<const std::uint16_t> u16);
// Throws FormatError on bad magic, unknown tag or a truncated payload.
DsvRecord read_dsv(std::istream& in);

void save_volume(const std::filesystem::path& path, const Volume& v);
void save_volume(const std::filesystem::path& path, const SegVolume& v);
std::variant<Volume, SegVolume> load_volume(const std::filesystem::path& path);
Volume load_intensity(const std::filesystem::path& path);
SegVolume load_labels(const std::filesystem::path& path);

}  // namespace dsvit::synth
