#include "rfdvc/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace rfdvc {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) throw std::runtime_error("truncated netpbm header");
  int v = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw std::runtime_error("malformed netpbm header");
  return v;
}

}  // namespace

void write_ppm(const std::string& path, const Frame& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "P6\n" << f.width << " " << f.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.pixels.data()),
            std::streamsize(f.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Frame read_ppm(const std::string& path, bool pad_to_16) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') throw std::runtime_error("not a P6 ppm: " + path);
  uint32_t w = uint32_t(next_header_int(in));
  uint32_t h = uint32_t(next_header_int(in));
  int maxval = next_header_int(in);
  if (maxval != 255) throw std::runtime_error("unsupported ppm maxval");
  std::vector<uint8_t> raw(size_t(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) throw std::runtime_error("truncated ppm payload: " + path);

  uint32_t pw = w, ph = h;
  if (pad_to_16) {
    pw = (w + 15) / 16 * 16;
    ph = (h + 15) / 16 * 16;
  }
  Frame f(pw, ph, FrameRole::Cav);
  for (uint32_t y = 0; y < ph; ++y) {
    uint32_t sy = std::min(y, h - 1);
    for (uint32_t x = 0; x < pw; ++x) {
      uint32_t sx = std::min(x, w - 1);
      const uint8_t* s = raw.data() + (size_t(sy) * w + sx) * 3;
      uint8_t* d = f.px(x, y);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return f;
}

void write_pgm(const std::string& path, const Mask& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "P5\n" << m.width << " " << m.height << "\n255\n";
  uint8_t gray = uint8_t(std::min<uint32_t>(m.label, 255));
  std::vector<uint8_t> row(m.width);
  for (uint32_t y = 0; y < m.height; ++y) {
    for (uint32_t x = 0; x < m.width; ++x) row[x] = m.test(x, y) ? gray : 0;
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Mask read_pgm(const std::string& path, uint32_t label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("not a P5 pgm: " + path);
  uint32_t w = uint32_t(next_header_int(in));
  uint32_t h = uint32_t(next_header_int(in));
  int maxval = next_header_int(in);
  if (maxval != 255) throw std::runtime_error("unsupported pgm maxval");
  std::vector<uint8_t> raw(size_t(w) * h);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) throw std::runtime_error("truncated pgm payload: " + path);
  Mask m(w, h, label);
  for (uint32_t y = 0; y < h; ++y)
    for (uint32_t x = 0; x < w; ++x)
      if (raw[size_t(y) * w + x] != 0) m.set(x, y);
  m.finalize();
  return m;
}

}  // namespace rfdvc
