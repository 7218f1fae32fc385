#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace boxlabel::png {

enum class ColourType { Gray, GrayAlpha, Rgb, Rgba, Palette };

/// Decoded PNG samples without colour conversion. Sub-byte depths are
/// unpacked to one byte per sample; 16-bit samples are stored big-endian as
/// in the file.
struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 8;
  ColourType colour = ColourType::Gray;
  int channels = 1;
  std::vector<std::uint8_t> samples;
  std::vector<std::array<std::uint8_t, 3>> palette;

  std::uint16_t sample(std::size_t pixel, int channel) const;
};

/// Throws IoError when the file cannot be opened, FormatError when it is not
/// a decodable PNG.
RawImage read(const std::filesystem::path& path);

/// Writes an 8-bit PNG; `palette` only for ColourType::Palette.
void write(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height, ColourType colour,
           const std::vector<std::uint8_t>& samples, const std::vector<std::array<std::uint8_t, 3>>& palette = {},
           int bit_depth = 8);

}  // namespace boxlabel::png
