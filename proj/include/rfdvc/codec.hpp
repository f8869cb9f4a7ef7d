#pragma once

#include <cstdint>
#include <vector>

#include "rfdvc/parallel.hpp"
#include "rfdvc/types.hpp"

namespace rfdvc {

struct CodecParams {
  int quant_step = 8;  // linear quantizer divisor, >= 1
  int gop_len = 10;    // max frames per batch; frame 0 is the I-frame
  int slice_rows = 2;  // 8-px block rows per slice

  void validate(uint32_t height) const;  // throws std::invalid_argument
};

inline uint32_t slices_per_frame(uint32_t height, int slice_rows) {
  return height / (uint32_t(slice_rows) * 8);
}

struct SliceLoc {
  uint32_t offset = 0;  // from payload start, points at the sync marker
  uint32_t length = 0;  // payload bytes following the marker
};

// Container layout (all integers little-endian):
//   "RFDV" | version u8 | width u16 | height u16 | frame_count u8 |
//   gop_len u8 | quant_step u8 | slice_rows u8 |
//   directory (frame_count x slices_per_frame x {offset u32, length u32}) |
//   payloads (each slice: 00 00 01 AB marker, then byte-aligned payload)
struct Bitstream {
  std::vector<uint8_t> bytes;

  uint32_t width = 0;
  uint32_t height = 0;
  uint8_t frame_count = 0;
  uint8_t gop_len = 0;
  uint8_t quant_step = 0;
  uint8_t slice_rows = 0;
  size_t payload_offset = 0;
  std::vector<std::vector<SliceLoc>> directory;  // [frame][slice]

  size_t total_bytes() const { return bytes.size(); }

  // Parses and validates the header + directory; throws on corruption.
  static Bitstream parse(std::vector<uint8_t> raw);
};

// Encodes a batch as one GOP: I-frame then P-frames predicted from the
// previously reconstructed frame (closed loop, no motion search). RGB is
// converted to full-range BT.601 YCbCr 4:4:4; each plane is coded in 8x8
// blocks with SKIP / UNIFORM / CODED modes, orthonormal DCT-II, linear
// quantization and Exp-Golomb entropy coding. Byte-identical output for
// identical input regardless of the execution policy.
Bitstream encode_batch(const std::vector<Frame>& frames, const CodecParams& params,
                       Exec exec = Exec::Parallel);

// Lost-slice fill at the reconstruction stage. Black keeps the plane at
// the delta background (Y 0, chroma neutral); PreviousOrGray copies the
// co-located rows of the previous reconstruction, mid-gray for frame 0.
enum class Conceal : uint8_t { Black, PreviousOrGray };

struct DecodeResult {
  std::vector<Frame> frames;
  // slice_ok[frame][slice]: slice arrived and parsed cleanly.
  std::vector<std::vector<uint8_t>> slice_ok;
};

// Decodes per-slice; loss_map[frame][slice] marks slices that arrived
// (empty map = everything arrived). A corrupt slice behind a valid sync
// marker is marked lost and decoding continues; a corrupt header throws.
DecodeResult decode_batch(const Bitstream& bits, const CodecParams& params,
                          const std::vector<std::vector<uint8_t>>& loss_map, Conceal conceal,
                          Exec exec = Exec::Parallel);

// Full-range BT.601 4:4:4 conversion, one int plane per component in
// [0,255]. Exposed for plane-level tests and tools.
void rgb_to_ycbcr(const Frame& f, std::vector<int16_t>& y, std::vector<int16_t>& cb,
                  std::vector<int16_t>& cr);
Frame ycbcr_to_rgb(const std::vector<int16_t>& y, const std::vector<int16_t>& cb,
                   const std::vector<int16_t>& cr, uint32_t width, uint32_t height);

// Orthonormal 2-D DCT-II / inverse on an 8x8 block, fixed summation order.
void dct8x8_forward(const double in[64], double out[64]);
void dct8x8_inverse(const double in[64], double out[64]);

}  // namespace rfdvc
