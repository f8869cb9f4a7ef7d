#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rfdvc/types.hpp"

namespace rfdvc {

struct SegParams {
  double delta_thr = 0.5;          // IoU match threshold, (0, 1]
  int color_quant_levels = 8;      // uniform bins per channel
  uint32_t min_region_area = 16;   // components below this are dropped
  double poly_epsilon = 1.0;       // Douglas-Peucker tolerance, px

  void validate() const;  // throws std::invalid_argument
};

struct Polygon {
  uint16_t label = 1;
  std::vector<std::pair<uint16_t, uint16_t>> pts;  // closed ring, last edge implicit
};

struct PolygonSet {
  std::vector<Polygon> polys;

  size_t byte_size() const;
  std::vector<uint8_t> serialize() const;
  static PolygonSet deserialize(const uint8_t* data, size_t len, size_t* consumed = nullptr);

  // Full-frame coverage rectangle (the no-segmentation case).
  static PolygonSet full_frame(uint32_t width, uint32_t height);
};

// Coverage bitmap of all polygons in the set: scanline fill (even-odd, pixel
// centers) plus the traced boundary itself.
Mask rasterize_polygons(const PolygonSet& set, uint32_t width, uint32_t height);

// Region segmentation stand-in: channels quantized to uniform bins,
// 4-connected components over identical quantized colors, small components
// dropped. Labels follow scan order of first pixels.
MaskSet segment_regions(const Frame& frame, const SegParams& params);

// Masks of m_cav whose best IoU against m_rf does not exceed delta_thr
// (inclusive boundary: a tie still counts as a difference).
MaskSet match_delta_masks(const MaskSet& m_rf, const MaskSet& m_cav, const SegParams& params);

struct DeltaResult {
  Frame delta;       // f_cav inside the transmitted region, black elsewhere
  PolygonSet polys;  // region outline side-channel
};

// Delta segmentation: segment both frames, keep unmatched CAV regions, add
// the critical-class oracle masks unconditionally, compose delta + polygons.
DeltaResult seg_delta(const Frame& f_rf, const Frame& f_cav, const MaskSet& class_oracle,
                      const SegParams& params);

// Ideal delta from ground-truth masks: no false positives or negatives.
DeltaResult ideal_delta(const Frame& f_cav, const MaskSet& gt);

// Moore-neighbor boundary trace per connected component, then
// Douglas-Peucker simplification. One output polygon per component, labeled
// by the source mask.
PolygonSet extract_polygons(const MaskSet& masks, double poly_epsilon);

}  // namespace rfdvc
