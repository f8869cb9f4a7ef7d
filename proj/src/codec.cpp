#include "rfdvc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rfdvc/bitio.hpp"

namespace rfdvc {

namespace {

constexpr uint8_t kSyncMarker[4] = {0x00, 0x00, 0x01, 0xAB};
constexpr size_t kHeaderBytes = 13;

// cos(i*pi/16) for i in [0, 8]; literals round-trip exactly to the nearest
// double so the transform is bit-identical on every platform.
constexpr double kCos16[9] = {
    1.0,
    0.9807852804032304491,
    0.9238795325112867561,
    0.8314696123025452371,
    0.7071067811865475244,
    0.5555702330196022247,
    0.3826834323650897717,
    0.1950903220161282678,
    0.0,
};

double cos_m_pi16(int m) {
  m %= 32;
  if (m <= 8) return kCos16[m];
  if (m <= 16) return -kCos16[16 - m];
  if (m <= 24) return -kCos16[m - 16];
  return kCos16[32 - m];
}

struct DctTables {
  double c[8][8];  // c[k][n] = a_k * cos((2n+1) k pi / 16)
  DctTables() {
    const double a0 = 0.5 * kCos16[4];  // sqrt(1/8)
    for (int k = 0; k < 8; ++k)
      for (int n = 0; n < 8; ++n)
        c[k][n] = (k == 0 ? a0 : 0.5) * cos_m_pi16(((2 * n + 1) * k) % 32);
  }
};
const DctTables kDct;

constexpr int kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline int64_t round_half_away(double x) {
  return x >= 0 ? int64_t(std::floor(x + 0.5)) : -int64_t(std::floor(-x + 0.5));
}

inline int16_t clamp255(int32_t v) { return int16_t(std::clamp(v, 0, 255)); }

void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v & 0xff));
  out.push_back(uint8_t(v >> 8));
}

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

uint16_t get_u16le(const uint8_t* p) { return uint16_t(p[0] | (uint16_t(p[1]) << 8)); }

uint32_t get_u32le(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

using Plane = std::vector<int16_t>;

void block_get(const Plane& plane, uint32_t w, uint32_t bx, uint32_t by, int32_t out[64]) {
  for (int r = 0; r < 8; ++r) {
    const int16_t* src = plane.data() + size_t(by * 8 + r) * w + bx * 8;
    for (int c = 0; c < 8; ++c) out[r * 8 + c] = src[c];
  }
}

void block_put(Plane& plane, uint32_t w, uint32_t bx, uint32_t by, const int32_t in[64]) {
  for (int r = 0; r < 8; ++r) {
    int16_t* dst = plane.data() + size_t(by * 8 + r) * w + bx * 8;
    for (int c = 0; c < 8; ++c) dst[c] = int16_t(in[r * 8 + c]);
  }
}

// Quantize + entropy-code one transform block; levels are written in
// zigzag order as (run, level) pairs preceded by the nonzero count.
void write_coded_block(BitWriter& w, const double src[64], int quant, int32_t levels[64]) {
  double coeffs[64];
  dct8x8_forward(src, coeffs);
  int n_nonzero = 0;
  for (int i = 0; i < 64; ++i) {
    levels[i] = int32_t(round_half_away(coeffs[i] / quant));
    if (levels[i] != 0) ++n_nonzero;
  }
  w.put_ue(uint32_t(n_nonzero));
  int run = 0;
  for (int i = 0; i < 64; ++i) {
    int32_t lev = levels[kZigzag[i]];
    if (lev == 0) {
      ++run;
      continue;
    }
    w.put_ue(uint32_t(run));
    w.put_se(lev);
    run = 0;
  }
}

void read_coded_block(BitReader& r, int32_t levels[64]) {
  std::fill(levels, levels + 64, 0);
  uint32_t n = r.get_ue();
  if (n > 64) throw std::runtime_error("coefficient count out of range");
  int pos = -1;
  for (uint32_t j = 0; j < n; ++j) {
    pos += int(r.get_ue()) + 1;
    if (pos >= 64) throw std::runtime_error("coefficient run past block end");
    levels[kZigzag[pos]] = r.get_se();
  }
}

// Dequantized inverse transform shared by encoder reconstruction and the
// decoder so both sides stay bit-identical.
void reconstruct_coded(const int32_t levels[64], int quant, double out[64]) {
  double coeffs[64];
  for (int i = 0; i < 64; ++i) coeffs[i] = double(levels[i]) * quant;
  dct8x8_inverse(coeffs, out);
}

enum IMode : uint32_t { kIUniform = 0, kICoded = 1 };
enum PMode : uint32_t { kPSkip = 0, kPUniform = 1, kPCoded = 2 };

void encode_block_i(BitWriter& w, const int32_t src[64], int quant, int32_t recon[64]) {
  bool uniform = true;
  for (int i = 1; i < 64 && uniform; ++i) uniform = src[i] == src[0];
  if (uniform) {
    w.put_ue(kIUniform);
    w.put_bits(uint32_t(src[0]), 8);
    for (int i = 0; i < 64; ++i) recon[i] = src[0];
    return;
  }
  w.put_ue(kICoded);
  double centered[64];
  for (int i = 0; i < 64; ++i) centered[i] = double(src[i] - 128);
  int32_t levels[64];
  write_coded_block(w, centered, quant, levels);
  double rec[64];
  reconstruct_coded(levels, quant, rec);
  for (int i = 0; i < 64; ++i) recon[i] = clamp255(int32_t(round_half_away(rec[i])) + 128);
}

void encode_block_p(BitWriter& w, const int32_t src[64], const int32_t ref[64], int quant,
                    int32_t recon[64]) {
  int32_t res[64];
  for (int i = 0; i < 64; ++i) res[i] = src[i] - ref[i];
  bool uniform = true;
  for (int i = 1; i < 64 && uniform; ++i) uniform = res[i] == res[0];
  if (uniform && res[0] == 0) {
    w.put_ue(kPSkip);
    std::copy(ref, ref + 64, recon);
    return;
  }
  if (uniform) {
    w.put_ue(kPUniform);
    w.put_se(res[0]);
    for (int i = 0; i < 64; ++i) recon[i] = clamp255(ref[i] + res[0]);
    return;
  }
  w.put_ue(kPCoded);
  double residual[64];
  for (int i = 0; i < 64; ++i) residual[i] = double(res[i]);
  int32_t levels[64];
  write_coded_block(w, residual, quant, levels);
  double rec[64];
  reconstruct_coded(levels, quant, rec);
  for (int i = 0; i < 64; ++i) recon[i] = clamp255(ref[i] + int32_t(round_half_away(rec[i])));
}

void decode_block_i(BitReader& r, int quant, int32_t recon[64]) {
  uint32_t mode = r.get_ue();
  if (mode == kIUniform) {
    int32_t v = int32_t(r.get_bits(8));
    for (int i = 0; i < 64; ++i) recon[i] = v;
    return;
  }
  if (mode != kICoded) throw std::runtime_error("bad intra block mode");
  int32_t levels[64];
  read_coded_block(r, levels);
  double rec[64];
  reconstruct_coded(levels, quant, rec);
  for (int i = 0; i < 64; ++i) recon[i] = clamp255(int32_t(round_half_away(rec[i])) + 128);
}

void decode_block_p(BitReader& r, const int32_t ref[64], int quant, int32_t recon[64]) {
  uint32_t mode = r.get_ue();
  if (mode == kPSkip) {
    std::copy(ref, ref + 64, recon);
    return;
  }
  if (mode == kPUniform) {
    int32_t v = r.get_se();
    for (int i = 0; i < 64; ++i) recon[i] = clamp255(ref[i] + v);
    return;
  }
  if (mode != kPCoded) throw std::runtime_error("bad inter block mode");
  int32_t levels[64];
  read_coded_block(r, levels);
  double rec[64];
  reconstruct_coded(levels, quant, rec);
  for (int i = 0; i < 64; ++i) recon[i] = clamp255(ref[i] + int32_t(round_half_away(rec[i])));
}

struct FramePlanes {
  Plane y, cb, cr;
  Plane& operator[](int i) { return i == 0 ? y : (i == 1 ? cb : cr); }
  const Plane& operator[](int i) const { return i == 0 ? y : (i == 1 ? cb : cr); }
};

// Encodes all planes of one slice band; reconstruction is written into
// recon so later P-frames predict from exactly what the decoder will see.
std::vector<uint8_t> encode_slice(const FramePlanes& cur, const FramePlanes* prev_recon,
                                  FramePlanes& recon, uint32_t width, uint32_t slice,
                                  const CodecParams& params) {
  BitWriter w;
  const uint32_t bw = width / 8;
  const uint32_t by0 = slice * uint32_t(params.slice_rows);
  for (int p = 0; p < 3; ++p) {
    for (uint32_t by = by0; by < by0 + uint32_t(params.slice_rows); ++by) {
      for (uint32_t bx = 0; bx < bw; ++bx) {
        int32_t src[64], rec[64];
        block_get(cur[p], width, bx, by, src);
        if (prev_recon) {
          int32_t ref[64];
          block_get((*prev_recon)[p], width, bx, by, ref);
          encode_block_p(w, src, ref, params.quant_step, rec);
        } else {
          encode_block_i(w, src, params.quant_step, rec);
        }
        block_put(recon[p], width, bx, by, rec);
      }
    }
  }
  w.align();
  return w.take();
}

void decode_slice(const uint8_t* payload, size_t len, const FramePlanes* prev_recon,
                  FramePlanes& recon, uint32_t width, uint32_t slice, int quant, int slice_rows) {
  BitReader r(payload, len);
  const uint32_t bw = width / 8;
  const uint32_t by0 = slice * uint32_t(slice_rows);
  for (int p = 0; p < 3; ++p) {
    for (uint32_t by = by0; by < by0 + uint32_t(slice_rows); ++by) {
      for (uint32_t bx = 0; bx < bw; ++bx) {
        int32_t rec[64];
        if (prev_recon) {
          int32_t ref[64];
          block_get((*prev_recon)[p], width, bx, by, ref);
          decode_block_p(r, ref, quant, rec);
        } else {
          decode_block_i(r, quant, rec);
        }
        block_put(recon[p], width, bx, by, rec);
      }
    }
  }
}

void conceal_slice(FramePlanes& recon, const FramePlanes* prev_recon, uint32_t width,
                   uint32_t slice, int slice_rows, Conceal mode) {
  const size_t row0 = size_t(slice) * slice_rows * 8 * width;
  const size_t n = size_t(slice_rows) * 8 * width;
  for (int p = 0; p < 3; ++p) {
    int16_t fallback = mode == Conceal::Black ? (p == 0 ? int16_t(0) : int16_t(128))
                                              : int16_t(128);
    if (mode == Conceal::PreviousOrGray && prev_recon) {
      std::copy((*prev_recon)[p].begin() + row0, (*prev_recon)[p].begin() + row0 + n,
                recon[p].begin() + row0);
    } else {
      std::fill(recon[p].begin() + row0, recon[p].begin() + row0 + n, fallback);
    }
  }
}

}  // namespace

void dct8x8_forward(const double in[64], double out[64]) {
  double tmp[64];
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += kDct.c[u][y] * in[y * 8 + x];
      tmp[u * 8 + x] = s;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += tmp[u * 8 + x] * kDct.c[v][x];
      out[u * 8 + v] = s;
    }
  }
}

void dct8x8_inverse(const double in[64], double out[64]) {
  double tmp[64];
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += kDct.c[u][y] * in[u * 8 + v];
      tmp[y * 8 + v] = s;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += tmp[y * 8 + v] * kDct.c[v][x];
      out[y * 8 + x] = s;
    }
  }
}

void rgb_to_ycbcr(const Frame& f, std::vector<int16_t>& y, std::vector<int16_t>& cb,
                  std::vector<int16_t>& cr) {
  size_t n = size_t(f.width) * f.height;
  y.resize(n);
  cb.resize(n);
  cr.resize(n);
  const uint8_t* p = f.pixels.data();
  for (size_t i = 0; i < n; ++i, p += 3) {
    double r = p[0], g = p[1], b = p[2];
    y[i] = clamp255(int32_t(round_half_away(0.299 * r + 0.587 * g + 0.114 * b)));
    cb[i] = clamp255(int32_t(round_half_away(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b)));
    cr[i] = clamp255(int32_t(round_half_away(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b)));
  }
}

Frame ycbcr_to_rgb(const std::vector<int16_t>& y, const std::vector<int16_t>& cb,
                   const std::vector<int16_t>& cr, uint32_t width, uint32_t height) {
  Frame f(width, height, FrameRole::Cav);
  uint8_t* p = f.pixels.data();
  for (size_t i = 0; i < y.size(); ++i, p += 3) {
    double yy = y[i], u = cb[i] - 128.0, v = cr[i] - 128.0;
    p[0] = uint8_t(clamp255(int32_t(round_half_away(yy + 1.402 * v))));
    p[1] = uint8_t(clamp255(int32_t(round_half_away(yy - 0.344136 * u - 0.714136 * v))));
    p[2] = uint8_t(clamp255(int32_t(round_half_away(yy + 1.772 * u))));
  }
  return f;
}

void CodecParams::validate(uint32_t height) const {
  if (quant_step < 1 || quant_step > 255)
    throw std::invalid_argument("quant_step must be in [1, 255]");
  if (gop_len < 1 || gop_len > 255) throw std::invalid_argument("gop_len must be in [1, 255]");
  if (slice_rows < 1 || height % (uint32_t(slice_rows) * 8) != 0)
    throw std::invalid_argument("slice height must divide frame height");
}

Bitstream encode_batch(const std::vector<Frame>& frames, const CodecParams& params, Exec exec) {
  if (frames.empty()) throw std::invalid_argument("encode_batch: empty batch");
  if (frames.size() > size_t(params.gop_len))
    throw std::invalid_argument("encode_batch: batch exceeds gop_len");
  const uint32_t w = frames[0].width, h = frames[0].height;
  if (w > 0xffff || h > 0xffff) throw std::invalid_argument("frame too large for container");
  params.validate(h);
  for (const auto& f : frames)
    if (!f.same_dims(frames[0])) throw std::invalid_argument("encode_batch: dimension mismatch");

  const uint32_t n_slices = slices_per_frame(h, params.slice_rows);
  const size_t n_frames = frames.size();

  std::vector<std::vector<std::vector<uint8_t>>> payloads(n_frames);
  FramePlanes recon_prev, recon_cur;
  for (size_t f = 0; f < n_frames; ++f) {
    FramePlanes cur;
    rgb_to_ycbcr(frames[f], cur.y, cur.cb, cur.cr);
    recon_cur.y.assign(cur.y.size(), 0);
    recon_cur.cb.assign(cur.y.size(), 0);
    recon_cur.cr.assign(cur.y.size(), 0);
    payloads[f].resize(n_slices);
    const FramePlanes* prev = f == 0 ? nullptr : &recon_prev;
    parallel_for(exec, n_slices, [&](int64_t s) {
      payloads[f][size_t(s)] = encode_slice(cur, prev, recon_cur, w, uint32_t(s), params);
    });
    recon_prev = std::move(recon_cur);
    recon_cur = FramePlanes{};
  }

  Bitstream bs;
  bs.width = w;
  bs.height = h;
  bs.frame_count = uint8_t(n_frames);
  bs.gop_len = uint8_t(params.gop_len);
  bs.quant_step = uint8_t(params.quant_step);
  bs.slice_rows = uint8_t(params.slice_rows);

  auto& out = bs.bytes;
  out.reserve(kHeaderBytes + n_frames * n_slices * 8 + 4096);
  out.insert(out.end(), {'R', 'F', 'D', 'V'});
  out.push_back(1);  // version
  put_u16le(out, uint16_t(w));
  put_u16le(out, uint16_t(h));
  out.push_back(bs.frame_count);
  out.push_back(bs.gop_len);
  out.push_back(bs.quant_step);
  out.push_back(bs.slice_rows);

  bs.directory.assign(n_frames, std::vector<SliceLoc>(n_slices));
  uint32_t off = 0;
  for (size_t f = 0; f < n_frames; ++f) {
    for (uint32_t s = 0; s < n_slices; ++s) {
      bs.directory[f][s] = SliceLoc{off, uint32_t(payloads[f][s].size())};
      off += 4 + uint32_t(payloads[f][s].size());
    }
  }
  for (size_t f = 0; f < n_frames; ++f)
    for (uint32_t s = 0; s < n_slices; ++s) {
      put_u32le(out, bs.directory[f][s].offset);
      put_u32le(out, bs.directory[f][s].length);
    }
  bs.payload_offset = out.size();
  for (size_t f = 0; f < n_frames; ++f)
    for (uint32_t s = 0; s < n_slices; ++s) {
      out.insert(out.end(), kSyncMarker, kSyncMarker + 4);
      out.insert(out.end(), payloads[f][s].begin(), payloads[f][s].end());
    }
  return bs;
}

Bitstream Bitstream::parse(std::vector<uint8_t> raw) {
  if (raw.size() < kHeaderBytes) throw std::runtime_error("bitstream header truncated");
  if (std::memcmp(raw.data(), "RFDV", 4) != 0) throw std::runtime_error("bad bitstream magic");
  if (raw[4] != 1) throw std::runtime_error("unsupported bitstream version");
  Bitstream bs;
  bs.width = get_u16le(raw.data() + 5);
  bs.height = get_u16le(raw.data() + 7);
  bs.frame_count = raw[9];
  bs.gop_len = raw[10];
  bs.quant_step = raw[11];
  bs.slice_rows = raw[12];
  if (bs.width == 0 || bs.height == 0 || bs.width % 16 || bs.height % 16 ||
      bs.frame_count == 0 || bs.quant_step == 0 || bs.slice_rows == 0 ||
      bs.height % (uint32_t(bs.slice_rows) * 8) != 0)
    throw std::runtime_error("bad bitstream header fields");
  const uint32_t n_slices = slices_per_frame(bs.height, bs.slice_rows);
  const size_t dir_bytes = size_t(bs.frame_count) * n_slices * 8;
  if (raw.size() < kHeaderBytes + dir_bytes) throw std::runtime_error("bitstream directory truncated");
  bs.payload_offset = kHeaderBytes + dir_bytes;
  const size_t payload_len = raw.size() - bs.payload_offset;
  bs.directory.assign(bs.frame_count, std::vector<SliceLoc>(n_slices));
  const uint8_t* d = raw.data() + kHeaderBytes;
  for (uint32_t f = 0; f < bs.frame_count; ++f) {
    for (uint32_t s = 0; s < n_slices; ++s, d += 8) {
      SliceLoc loc{get_u32le(d), get_u32le(d + 4)};
      if (size_t(loc.offset) + 4 + loc.length > payload_len)
        throw std::runtime_error("slice directory entry out of range");
      bs.directory[f][s] = loc;
    }
  }
  bs.bytes = std::move(raw);
  return bs;
}

DecodeResult decode_batch(const Bitstream& bits, const CodecParams& params,
                          const std::vector<std::vector<uint8_t>>& loss_map, Conceal conceal,
                          Exec exec) {
  if (bits.bytes.empty() || bits.directory.empty())
    throw std::invalid_argument("decode_batch: unparsed bitstream");
  if (params.quant_step != bits.quant_step || params.slice_rows != bits.slice_rows)
    throw std::invalid_argument("decode_batch: params disagree with stream header");
  const uint32_t w = bits.width, h = bits.height;
  const uint32_t n_slices = slices_per_frame(h, bits.slice_rows);
  const size_t n_frames = bits.frame_count;
  const uint8_t* payload = bits.bytes.data() + bits.payload_offset;

  DecodeResult result;
  result.frames.reserve(n_frames);
  result.slice_ok.assign(n_frames, std::vector<uint8_t>(n_slices, 0));

  FramePlanes recon_prev, recon_cur;
  for (size_t f = 0; f < n_frames; ++f) {
    recon_cur.y.assign(size_t(w) * h, 0);
    recon_cur.cb.assign(size_t(w) * h, 0);
    recon_cur.cr.assign(size_t(w) * h, 0);
    const FramePlanes* prev = f == 0 ? nullptr : &recon_prev;
    parallel_for(exec, n_slices, [&](int64_t si) {
      uint32_t s = uint32_t(si);
      bool available = loss_map.empty() ||
                       (f < loss_map.size() && s < loss_map[f].size() && loss_map[f][s] != 0);
      if (!available) return;
      const SliceLoc& loc = bits.directory[f][s];
      const uint8_t* marker = payload + loc.offset;
      if (std::memcmp(marker, kSyncMarker, 4) != 0) return;  // lost, resync via directory
      try {
        decode_slice(marker + 4, loc.length, prev, recon_cur, w, s, bits.quant_step,
                     bits.slice_rows);
        result.slice_ok[f][s] = 1;
      } catch (const std::exception&) {
        // corrupt payload behind a valid sync: drop the slice, keep going
      }
    });
    for (uint32_t s = 0; s < n_slices; ++s)
      if (!result.slice_ok[f][s])
        conceal_slice(recon_cur, f == 0 ? nullptr : &recon_prev, w, s, bits.slice_rows, conceal);

    Frame out = ycbcr_to_rgb(recon_cur.y, recon_cur.cb, recon_cur.cr, w, h);
    out.frame_index = uint32_t(f);
    result.frames.push_back(std::move(out));
    recon_prev = std::move(recon_cur);
    recon_cur = FramePlanes{};
  }
  return result;
}

}  // namespace rfdvc
