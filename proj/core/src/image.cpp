#include "snaptag/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace snaptag {

RasterImage::RasterImage(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || (c != 1 && c != 3 && c != 4))
    throw ImageError("invalid image dimensions");
  data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

BinaryImage::BinaryImage(int w, int h, std::uint8_t fill)
    : width(w), height(h) {
  if (w < 1 || h < 1) throw ImageError("invalid image dimensions");
  if (fill != 0 && fill != 255) throw ImageError("binary fill must be 0 or 255");
  data.assign(static_cast<std::size_t>(w) * h, fill);
}

namespace {

RasterImage read_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw ImageError("cannot open " + path.string());
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ImageError("libpng init failed");
  }
  RasterImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ImageError("png decode failed: " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  int chans = png_get_channels(png, info);
  if (chans == 2) {  // gray+alpha: keep alpha so to_grayscale drops it uniformly
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    chans = png_get_channels(png, info);
  }

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.channels = chans;
  img.data.resize(static_cast<std::size_t>(w) * h * chans);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * w * chans;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

RasterImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  char p, kind;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6'))
    throw ImageError("unsupported PNM magic in " + path.string());
  int w, h, maxval;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  in.get();  // single whitespace before raster
  if (!in || w < 1 || h < 1 || maxval != 255)
    throw ImageError("bad PNM header in " + path.string());
  RasterImage img(w, h, kind == '5' ? 1 : 3);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (!in) throw ImageError("truncated PNM raster in " + path.string());
  return img;
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ImageError("cannot open " + path.string());
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return read_pnm(path);
  throw ImageError("unrecognized image format: " + path.string());
}

static void write_pgm_raw(const std::uint8_t* data, int w, int h,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot write " + path.string());
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(w) * h);
  if (!out) throw ImageError("write failed: " + path.string());
}

void write_pgm(const RasterImage& gray, const std::filesystem::path& path) {
  if (gray.channels != 1) throw ImageError("write_pgm requires grayscale");
  write_pgm_raw(gray.data.data(), gray.width, gray.height, path);
}

void write_pgm(const BinaryImage& bin, const std::filesystem::path& path) {
  write_pgm_raw(bin.data.data(), bin.width, bin.height, path);
}

}  // namespace snaptag
