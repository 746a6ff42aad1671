#include "footseg/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

namespace footseg::io {
namespace fs = std::filesystem;
namespace {

struct Raw {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;  // interleaved
};

std::runtime_error io_error(const fs::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool is_pnm(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".pgm" || ext == ".ppm";
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw io_error(path, "cannot open");
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

Raw read_png(const fs::path& path) {
  FilePtr file = open_file(path, "rb");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw io_error(path, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  Raw raw;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw io_error(path, "PNG decode failed: " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_bit_depth(png, info) == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) std::memcpy(&raw.samples[i], buffer.data() + 2 * i, 2);
  } else {
    for (std::size_t i = 0; i < n; ++i) raw.samples[i] = buffer[i];
  }
  return raw;
}

void write_png(const fs::path& path, const Raw& raw) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw io_error(path, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  const int bytes = raw.bit_depth == 16 ? 2 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(raw.width) * raw.channels * bytes;
  std::vector<png_byte> buffer(rowbytes * raw.height);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (bytes == 2) {
      buffer[2 * i] = static_cast<png_byte>(raw.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(raw.samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(raw.samples[i]);
    }
  }
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error(path, "PNG encode failed: " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
               raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raw read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path, "cannot open");
  auto token = [&]() {
    std::string t;
    while (in >> std::ws && in.peek() == '#') in.ignore(1 << 20, '\n');
    in >> t;
    return t;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P6") throw io_error(path, "unsupported PNM type " + magic);
  Raw raw;
  raw.channels = magic == "P6" ? 3 : 1;
  raw.width = std::stoi(token());
  raw.height = std::stoi(token());
  const int maxval = std::stoi(token());
  in.get();
  raw.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  std::vector<unsigned char> bytes(n * (raw.bit_depth / 8));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw io_error(path, "truncated PNM data");
  for (std::size_t i = 0; i < n; ++i)
    raw.samples[i] = raw.bit_depth == 16 ? static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1])
                                         : bytes[i];
  return raw;
}

void write_pnm(const fs::path& path, const Raw& raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  out << (raw.channels == 3 ? "P6" : "P5") << '\n'
      << raw.width << ' ' << raw.height << '\n'
      << (raw.bit_depth == 16 ? 65535 : 255) << '\n';
  for (std::uint16_t s : raw.samples) {
    if (raw.bit_depth == 16) out.put(static_cast<char>(s >> 8));
    out.put(static_cast<char>(s & 0xff));
  }
  if (!out) throw io_error(path, "write failed");
}

Raw read_raw(const fs::path& path) { return is_pnm(path) ? read_pnm(path) : read_png(path); }
void write_raw(const fs::path& path, const Raw& raw) {
  if (is_pnm(path)) write_pnm(path, raw);
  else write_png(path, raw);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Image read_image(const fs::path& path) {
  const Raw raw = read_raw(path);
  const int channels = raw.channels >= 3 ? 3 : 1;
  const float scale = raw.bit_depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
  Image img(raw.width, raw.height, channels);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, x, y) = raw.samples[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels + c] * scale;
  return img;
}

void write_image(const fs::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3)
    throw io_error(path, "only 1- or 3-channel images can be written");
  Raw raw{image.width(), image.height(), image.channels(), 8, {}};
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height * raw.channels);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      for (int c = 0; c < raw.channels; ++c) {
        const float v = std::clamp(image.at(c, x, y), 0.0f, 1.0f);
        raw.samples[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels + c] =
            static_cast<std::uint16_t>(std::lround(v * 255.0f));
      }
  write_raw(path, raw);
}

BinaryMask read_mask(const fs::path& path) {
  const Raw raw = read_raw(path);
  BinaryMask mask(raw.width, raw.height);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = raw.samples[i * raw.channels] != 0 ? 1 : 0;
  return mask;
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  Raw raw{mask.width(), mask.height(), 1, 8, {}};
  raw.samples.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) raw.samples[i] = mask[i] ? 255 : 0;
  write_raw(path, raw);
}

LabelMap read_labels(const fs::path& path) {
  const Raw raw = read_raw(path);
  Grid<std::int32_t> g(raw.width, raw.height);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = raw.samples[i * raw.channels];
  return LabelMap::compact(g);
}

void write_labels(const fs::path& path, const LabelMap& labels) {
  if (labels.component_count() > 65535) throw io_error(path, "too many instances for 16-bit labels");
  Raw raw{labels.width(), labels.height(), 1, 16, {}};
  raw.samples.resize(labels.grid().size());
  for (std::size_t i = 0; i < raw.samples.size(); ++i) raw.samples[i] = static_cast<std::uint16_t>(labels[i]);
  write_raw(path, raw);
}

void write_gray8(const fs::path& path, const Grid<std::uint8_t>& gray) {
  Raw raw{gray.width(), gray.height(), 1, 8, {}};
  raw.samples.assign(gray.values().begin(), gray.values().end());
  write_raw(path, raw);
}

void write_dfld(const fs::path& path, const std::vector<const Grid<double>*>& planes) {
  if (planes.empty()) throw io_error(path, "DFLD needs at least one plane");
  const int w = planes.front()->width();
  const int h = planes.front()->height();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  out.write("DFLD", 4);
  put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(planes.size()));
  for (const Grid<double>* plane : planes) {
    if (!plane->same_shape(w, h)) throw io_error(path, "DFLD planes differ in size");
    for (double v : plane->values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw io_error(path, "write failed");
}

FloatPlanes read_dfld(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path, "cannot open");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DFLD", 4) != 0) throw io_error(path, "not a DFLD file");
  FloatPlanes fp;
  fp.width = static_cast<int>(get_u32(in));
  fp.height = static_cast<int>(get_u32(in));
  const std::uint32_t count = get_u32(in);
  const std::size_t n = static_cast<std::size_t>(fp.width) * fp.height;
  fp.planes.assign(count, std::vector<float>(n));
  for (auto& plane : fp.planes)
    for (float& v : plane) v = std::bit_cast<float>(get_u32(in));
  if (!in) throw io_error(path, "truncated DFLD file");
  return fp;
}

}  // namespace footseg::io
