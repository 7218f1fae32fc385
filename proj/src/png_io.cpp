#include "boxlabel/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "boxlabel/error.hpp"

namespace boxlabel::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ColourType colour_from_png(int type) {
  switch (type) {
    case PNG_COLOR_TYPE_GRAY: return ColourType::Gray;
    case PNG_COLOR_TYPE_GRAY_ALPHA: return ColourType::GrayAlpha;
    case PNG_COLOR_TYPE_RGB: return ColourType::Rgb;
    case PNG_COLOR_TYPE_RGB_ALPHA: return ColourType::Rgba;
    case PNG_COLOR_TYPE_PALETTE: return ColourType::Palette;
    default: return ColourType::Gray;
  }
}

int png_from_colour(ColourType c) {
  switch (c) {
    case ColourType::Gray: return PNG_COLOR_TYPE_GRAY;
    case ColourType::GrayAlpha: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case ColourType::Rgb: return PNG_COLOR_TYPE_RGB;
    case ColourType::Rgba: return PNG_COLOR_TYPE_RGB_ALPHA;
    case ColourType::Palette: return PNG_COLOR_TYPE_PALETTE;
  }
  return PNG_COLOR_TYPE_GRAY;
}

int channel_count(ColourType c) {
  switch (c) {
    case ColourType::Gray:
    case ColourType::Palette: return 1;
    case ColourType::GrayAlpha: return 2;
    case ColourType::Rgb: return 3;
    case ColourType::Rgba: return 4;
  }
  return 1;
}

// The setjmp frames below hold only plain data: libpng errors longjmp back
// into them, and buffers are owned by the callers.
struct Header {
  png_uint_32 width;
  png_uint_32 height;
  int bit_depth;
  int colour_type;
  png_color palette[256];
  int palette_size;
  std::size_t rowbytes;
};

bool read_header(png_structp png, png_infop info, std::FILE* fp, Header* h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_read_info(png, info);
  h->width = png_get_image_width(png, info);
  h->height = png_get_image_height(png, info);
  h->bit_depth = png_get_bit_depth(png, info);
  h->colour_type = png_get_color_type(png, info);
  h->palette_size = 0;
  if (h->colour_type == PNG_COLOR_TYPE_PALETTE) {
    png_colorp pal = nullptr;
    int n = 0;
    if (png_get_PLTE(png, info, &pal, &n) != 0) {
      h->palette_size = n > 256 ? 256 : n;
      for (int i = 0; i < h->palette_size; ++i) h->palette[i] = pal[i];
    }
  }
  if (h->bit_depth < 8) png_set_packing(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  h->rowbytes = png_get_rowbytes(png, info);
  return true;
}

bool read_rows(png_structp png, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

bool write_all(png_structp png, png_infop info, std::FILE* fp, const Header* h, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, h->width, h->height, h->bit_depth, h->colour_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (h->colour_type == PNG_COLOR_TYPE_PALETTE) png_set_PLTE(png, info, h->palette, h->palette_size);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

bool decode(std::FILE* fp, RawImage& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  auto h = std::make_unique<Header>();
  bool ok = read_header(png, info, fp, h.get());
  if (ok) {
    out.width = h->width;
    out.height = h->height;
    out.bit_depth = h->bit_depth;
    out.colour = colour_from_png(h->colour_type);
    out.channels = channel_count(out.colour);
    for (int i = 0; i < h->palette_size; ++i) out.palette.push_back({h->palette[i].red, h->palette[i].green, h->palette[i].blue});
    out.samples.resize(h->rowbytes * out.height);
    std::vector<png_bytep> rows(out.height);
    for (std::uint32_t y = 0; y < out.height; ++y) rows[y] = out.samples.data() + y * h->rowbytes;
    ok = read_rows(png, rows.data());
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return ok;
}

bool encode(std::FILE* fp, std::uint32_t width, std::uint32_t height, ColourType colour, int bit_depth,
            const std::vector<std::uint8_t>& samples, const std::vector<std::array<std::uint8_t, 3>>& palette) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  auto h = std::make_unique<Header>();
  h->width = width;
  h->height = height;
  h->bit_depth = bit_depth;
  h->colour_type = png_from_colour(colour);
  h->palette_size = static_cast<int>(std::min<std::size_t>(palette.size(), 256));
  for (int i = 0; i < h->palette_size; ++i) {
    const auto& c = palette[static_cast<std::size_t>(i)];
    h->palette[i] = {c[0], c[1], c[2]};
  }
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channel_count(colour) * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (std::uint32_t y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(samples.data() + y * rowbytes);
  const bool ok = write_all(png, info, fp, h.get(), rows.data());
  png_destroy_write_struct(&png, &info);
  return ok;
}

}  // namespace

std::uint16_t RawImage::sample(std::size_t pixel, int channel) const {
  const std::size_t idx = pixel * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel);
  if (bit_depth == 16) return static_cast<std::uint16_t>((samples[2 * idx] << 8) | samples[2 * idx + 1]);
  return samples[idx];
}

RawImage read(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::FormatError, path.string() + " is not a PNG file");
  }
  std::rewind(fp.get());
  RawImage out;
  if (!decode(fp.get(), out)) throw Error(ErrorCode::FormatError, "failed to decode " + path.string());
  return out;
}

void write(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height, ColourType colour,
           const std::vector<std::uint8_t>& samples, const std::vector<std::array<std::uint8_t, 3>>& palette,
           int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorCode::InvalidArgument, "only 8- and 16-bit PNG output");
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * static_cast<std::size_t>(channel_count(colour)) * (bit_depth / 8);
  if (samples.size() != expected) throw Error(ErrorCode::DimensionMismatch, "sample buffer size does not match PNG header");
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (!encode(fp.get(), width, height, colour, bit_depth, samples, palette)) {
    throw Error(ErrorCode::IoError, "failed to encode " + path.string());
  }
}

}  // namespace boxlabel::png
