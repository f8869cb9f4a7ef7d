#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rfdvc {

enum class FrameRole : uint8_t { Cav, Rf, Delta, Rec };

enum class Condition : uint8_t { Morning, Noon, Evening, Wet, Rain };
enum class Traffic : uint8_t { Empty, Sparse, Dense };

// Environmental condition of a capture. The static background model is
// always rendered under Morning/Empty, so any other condition here models
// the lighting discrepancy between live capture and the shared background.
struct ConditionTag {
  Condition condition = Condition::Morning;
  Traffic traffic = Traffic::Empty;
};

const char* to_string(Condition c);
const char* to_string(Traffic t);
const char* to_string(FrameRole r);
Condition condition_from_string(const std::string& s);
Traffic traffic_from_string(const std::string& s);

// Row-major homogeneous 4x4 camera-to-world transform. Bottom row must be
// (0,0,0,1) and the rotation block orthonormal within 1e-6.
struct CameraPose {
  std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  static CameraPose identity() { return CameraPose{}; }
  static CameraPose translation(double x, double y, double z);

  double tx() const { return m[3]; }
  double ty() const { return m[7]; }
  double tz() const { return m[11]; }

  bool bottom_row_valid() const;
  bool rotation_orthonormal(double tol = 1e-6) const;
  void validate() const;  // throws std::invalid_argument
};

CameraPose mat4_mul(const CameraPose& a, const CameraPose& b);
bool mat4_invertible(const CameraPose& a);

// 8-bit RGB raster. Width and height must be multiples of 16 so 8x8 blocks
// and slices tile exactly; the CLI pads external input to satisfy this.
struct Frame {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> pixels;  // row-major RGB
  FrameRole role = FrameRole::Cav;
  CameraPose pose;
  uint32_t frame_index = 0;
  ConditionTag condition;

  Frame() = default;
  Frame(uint32_t w, uint32_t h, FrameRole r);  // allocates black, validates

  size_t idx(uint32_t x, uint32_t y) const { return (size_t(y) * width + x) * 3; }
  uint8_t* px(uint32_t x, uint32_t y) { return pixels.data() + idx(x, y); }
  const uint8_t* px(uint32_t x, uint32_t y) const { return pixels.data() + idx(x, y); }

  bool same_dims(const Frame& o) const { return width == o.width && height == o.height; }
};

// Packed binary raster. Rows are padded to 64-bit word boundaries so
// per-row word ranges can be intersected cheaply.
struct Mask {
  uint32_t width = 0;
  uint32_t height = 0;
  uint32_t words_per_row = 0;
  std::vector<uint64_t> bits;
  uint32_t label = 1;  // >= 1, 0 is reserved for background
  uint32_t area = 0;
  // Tight bounding box, inclusive; meaningful only when area > 0.
  int32_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  Mask() = default;
  Mask(uint32_t w, uint32_t h, uint32_t lbl);

  bool test(uint32_t x, uint32_t y) const {
    return (bits[size_t(y) * words_per_row + x / 64] >> (x % 64)) & 1u;
  }
  void set(uint32_t x, uint32_t y) {
    bits[size_t(y) * words_per_row + x / 64] |= uint64_t(1) << (x % 64);
  }

  // Recomputes area and bbox from the bitmap; call after raw bit edits.
  void finalize();
  bool same_dims(const Mask& o) const { return width == o.width && height == o.height; }
};

struct MaskSet {
  enum class Source : uint8_t { SegmenterRf, SegmenterCav, ClassOracle, Delta, GroundTruth };
  Source source = Source::GroundTruth;
  std::vector<Mask> masks;

  void validate_unique_labels() const;  // throws on duplicates
};

// Rec. 601 luma, full range, as a real-valued plane.
std::vector<double> luma(const Frame& f);

// |a ∩ b| / |a ∪ b|; 0 when both masks are empty. Throws on dimension
// mismatch.
double mask_iou(const Mask& a, const Mask& b);

// M_ns = Rz(pi/2) * Rx(-pi/2) * Ry(pi) * t_trans * m_cl, with the standard
// right-handed rotation matrices. t_trans is a configurable axis
// substitution (identity by default) and must be invertible.
CameraPose convert_pose_carla_to_ns(const CameraPose& m_cl, const CameraPose& t_trans);

}  // namespace rfdvc
