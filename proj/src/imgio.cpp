#include "stereopipe/imgio.hpp"

#include <png.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "PFM codec assumes a little-endian host");

namespace stereopipe {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngPixels {
  int width = 0;
  int height = 0;
  int bit_depth = 0;  // 8 or 16 after transforms
  int channels = 0;   // 1 or 3 after transforms
  std::vector<std::uint8_t> bytes;  // row-major, host-endian for 16-bit

  std::uint16_t sample16(int u, int v) const {
    std::uint16_t s;
    std::memcpy(&s, bytes.data() + (static_cast<std::size_t>(v) * width + u) * 2,
                2);
    return s;
  }
};

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

PngPixels decode_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error(path + ": not a PNG file");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }

  PngPixels out;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": PNG decode error");
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // file is big-endian, we want host order
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.bytes.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int v = 0; v < out.height; ++v)
    rows[v] = out.bytes.data() + rowbytes * v;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

// data is host-endian; bit_depth 8 or 16, single channel.
void encode_png_gray(const std::string& path, int width, int height,
                     int bit_depth, const void* data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }

  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(path + ": PNG encode error");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);

  const std::size_t rowbytes =
      static_cast<std::size_t>(width) * (bit_depth / 8);
  const auto* base = static_cast<const std::uint8_t*>(data);
  rows.resize(height);
  for (int v = 0; v < height; ++v)
    rows[v] = const_cast<png_bytep>(base + rowbytes * v);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (pnm_token(in) != "P5")
    throw std::runtime_error(path + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0) throw std::runtime_error(path + ": empty PGM");
  if (maxval <= 0 || maxval > 255)
    throw std::runtime_error(path + ": unsupported PGM bit depth (maxval " +
                             std::to_string(maxval) + ")");
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw std::runtime_error(path + ": truncated PGM payload");
  return img;
}

}  // namespace

GrayImage load_gray(const std::string& path) {
  if (!has_png_signature(path)) return load_pgm(path);

  PngPixels png = decode_png(path);
  if (png.width <= 0 || png.height <= 0)
    throw std::runtime_error(path + ": empty image");
  if (png.bit_depth != 8)
    throw std::runtime_error(path + ": unsupported bit depth " +
                             std::to_string(png.bit_depth) +
                             " (expected 8-bit)");
  GrayImage img(png.width, png.height);
  if (png.channels == 1) {
    std::memcpy(img.data.data(), png.bytes.data(), img.data.size());
  } else if (png.channels == 3) {
    const std::uint8_t* src = png.bytes.data();
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const int r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
      img.data[i] = static_cast<std::uint8_t>((77 * r + 150 * g + 29 * b) >> 8);
    }
  } else {
    throw std::runtime_error(path + ": unsupported channel count " +
                             std::to_string(png.channels));
  }
  return img;
}

DisparityMap load_ground_truth(const std::string& path,
                               GtConvention convention) {
  if (convention == GtConvention::Eightbit) {
    GrayImage raw;
    if (has_png_signature(path)) {
      PngPixels png = decode_png(path);
      if (png.bit_depth != 8 || png.channels != 1)
        throw std::runtime_error(
            path + ": eightbit ground truth must be 8-bit single-channel");
      raw = GrayImage(png.width, png.height);
      std::memcpy(raw.data.data(), png.bytes.data(), raw.data.size());
    } else {
      raw = load_pgm(path);
    }
    DisparityMap map(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.data.size(); ++i)
      map.values[i] = raw.data[i];
    return map;
  }

  // kitti256
  PngPixels png = decode_png(path);
  if (png.bit_depth != 16 || png.channels != 1)
    throw std::runtime_error(
        path + ": kitti256 ground truth must be a 16-bit grayscale PNG");
  DisparityMap map(png.width, png.height);
  for (int v = 0; v < png.height; ++v) {
    for (int u = 0; u < png.width; ++u) {
      const std::uint16_t s = png.sample16(u, v);
      if (s == 0) continue;  // invalid by convention
      int d = (s + 128) >> 8;  // round(s / 256)
      if (d > 255) d = 255;
      map.at(u, v) = static_cast<std::int16_t>(d);
    }
  }
  return map;
}

void save_disparity(const DisparityMap& map, const std::string& path,
                    DisparityFormat format) {
  const std::size_t n = map.values.size();
  switch (format) {
    case DisparityFormat::Png16: {
      std::vector<std::uint16_t> buf(n);
      for (std::size_t i = 0; i < n; ++i)
        buf[i] = map.values[i] >= 0
                     ? static_cast<std::uint16_t>(map.values[i] * 256)
                     : 0;
      encode_png_gray(path, map.width, map.height, 16, buf.data());
      return;
    }
    case DisparityFormat::Png8: {
      std::vector<std::uint8_t> buf(n);
      for (std::size_t i = 0; i < n; ++i)
        buf[i] = map.values[i] >= 0 ? static_cast<std::uint8_t>(map.values[i])
                                    : 0;
      encode_png_gray(path, map.width, map.height, 8, buf.data());
      return;
    }
    case DisparityFormat::Pfm: {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open " + path + " for writing");
      out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
      std::vector<float> row(map.width);
      for (int v = map.height - 1; v >= 0; --v) {  // PFM rows are bottom-up
        for (int u = 0; u < map.width; ++u)
          row[u] = map.valid(u, v) ? static_cast<float>(map.at(u, v)) : -1.0f;
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
      }
      if (!out) throw std::runtime_error(path + ": PFM write failed");
      return;
    }
  }
  throw std::invalid_argument("unknown disparity format");
}

DisparityMap load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (pnm_token(in) != "Pf")
    throw std::runtime_error(path + ": not a grayscale PFM");
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    scale = std::stod(pnm_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed PFM header");
  }
  if (w <= 0 || h <= 0) throw std::runtime_error(path + ": empty PFM");
  if (scale >= 0.0)
    throw std::runtime_error(path + ": big-endian PFM is not supported");
  DisparityMap map(w, h);
  std::vector<float> row(w);
  for (int v = h - 1; v >= 0; --v) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(float)))
      throw std::runtime_error(path + ": truncated PFM payload");
    for (int u = 0; u < w; ++u) {
      if (row[u] < 0.0f) continue;
      long d = std::lround(row[u]);
      if (d > 255) d = 255;
      map.at(u, v) = static_cast<std::int16_t>(d);
    }
  }
  return map;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw std::runtime_error(path + ": PGM write failed");
}

void save_gray_png(const GrayImage& img, const std::string& path) {
  encode_png_gray(path, img.width, img.height, 8, img.data.data());
}

DisparityFormat parse_disparity_format(const std::string& name) {
  if (name == "png16") return DisparityFormat::Png16;
  if (name == "pfm") return DisparityFormat::Pfm;
  if (name == "png8") return DisparityFormat::Png8;
  throw std::invalid_argument("unknown disparity format: " + name);
}

GtConvention parse_gt_convention(const std::string& name) {
  if (name == "eightbit") return GtConvention::Eightbit;
  if (name == "kitti256") return GtConvention::Kitti256;
  throw std::invalid_argument("unknown ground-truth convention: " + name);
}

}  // namespace stereopipe
