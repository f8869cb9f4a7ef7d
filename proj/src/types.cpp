#include "rfdvc/types.hpp"

#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rfdvc {

const char* to_string(Condition c) {
  switch (c) {
    case Condition::Morning: return "morning";
    case Condition::Noon: return "noon";
    case Condition::Evening: return "evening";
    case Condition::Wet: return "wet";
    case Condition::Rain: return "rain";
  }
  return "?";
}

const char* to_string(Traffic t) {
  switch (t) {
    case Traffic::Empty: return "empty";
    case Traffic::Sparse: return "sparse";
    case Traffic::Dense: return "dense";
  }
  return "?";
}

const char* to_string(FrameRole r) {
  switch (r) {
    case FrameRole::Cav: return "cav";
    case FrameRole::Rf: return "rf";
    case FrameRole::Delta: return "delta";
    case FrameRole::Rec: return "rec";
  }
  return "?";
}

Condition condition_from_string(const std::string& s) {
  if (s == "morning") return Condition::Morning;
  if (s == "noon") return Condition::Noon;
  if (s == "evening") return Condition::Evening;
  if (s == "wet") return Condition::Wet;
  if (s == "rain") return Condition::Rain;
  throw std::invalid_argument("unknown condition: " + s);
}

Traffic traffic_from_string(const std::string& s) {
  if (s == "empty") return Traffic::Empty;
  if (s == "sparse") return Traffic::Sparse;
  if (s == "dense") return Traffic::Dense;
  throw std::invalid_argument("unknown traffic level: " + s);
}

CameraPose CameraPose::translation(double x, double y, double z) {
  CameraPose p;
  p.m[3] = x;
  p.m[7] = y;
  p.m[11] = z;
  return p;
}

bool CameraPose::bottom_row_valid() const {
  return m[12] == 0.0 && m[13] == 0.0 && m[14] == 0.0 && m[15] == 1.0;
}

bool CameraPose::rotation_orthonormal(double tol) const {
  // R * R^T must be identity within tol.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0;
      for (int k = 0; k < 3; ++k) dot += m[i * 4 + k] * m[j * 4 + k];
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(dot - want) > tol) return false;
    }
  }
  return true;
}

void CameraPose::validate() const {
  if (!bottom_row_valid()) throw std::invalid_argument("pose bottom row must be (0,0,0,1)");
  if (!rotation_orthonormal()) throw std::invalid_argument("pose rotation block not orthonormal");
}

CameraPose mat4_mul(const CameraPose& a, const CameraPose& b) {
  CameraPose r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += a.m[i * 4 + k] * b.m[k * 4 + j];
      r.m[i * 4 + j] = s;
    }
  }
  return r;
}

static double det3(const CameraPose& a) {
  const auto& m = a.m;
  return m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8]) +
         m[2] * (m[4] * m[9] - m[5] * m[8]);
}

bool mat4_invertible(const CameraPose& a) {
  // Homogeneous transform: invertible iff the 3x3 block is.
  return a.bottom_row_valid() && std::abs(det3(a)) > 1e-12;
}

Frame::Frame(uint32_t w, uint32_t h, FrameRole r) : width(w), height(h), role(r) {
  if (w == 0 || h == 0 || w % 16 != 0 || h % 16 != 0)
    throw std::invalid_argument("frame dimensions must be nonzero multiples of 16");
  pixels.assign(size_t(w) * h * 3, 0);
}

Mask::Mask(uint32_t w, uint32_t h, uint32_t lbl)
    : width(w), height(h), words_per_row((w + 63) / 64), label(lbl) {
  if (lbl < 1) throw std::invalid_argument("mask label must be >= 1");
  bits.assign(size_t(words_per_row) * h, 0);
}

void Mask::finalize() {
  area = 0;
  x0 = y0 = 0;
  x1 = y1 = -1;
  bool first = true;
  for (uint32_t y = 0; y < height; ++y) {
    const uint64_t* row = bits.data() + size_t(y) * words_per_row;
    uint32_t row_count = 0;
    for (uint32_t w = 0; w < words_per_row; ++w) row_count += std::popcount(row[w]);
    if (row_count == 0) continue;
    area += row_count;
    int32_t rx0 = -1, rx1 = -1;
    for (uint32_t w = 0; w < words_per_row; ++w) {
      if (row[w] == 0) continue;
      int lo = std::countr_zero(row[w]);
      int hi = 63 - std::countl_zero(row[w]);
      int32_t a = int32_t(w * 64 + lo), b = int32_t(w * 64 + hi);
      if (rx0 < 0 || a < rx0) rx0 = a;
      if (b > rx1) rx1 = b;
    }
    if (first) {
      x0 = rx0;
      x1 = rx1;
      y0 = y1 = int32_t(y);
      first = false;
    } else {
      if (rx0 < x0) x0 = rx0;
      if (rx1 > x1) x1 = rx1;
      y1 = int32_t(y);
    }
  }
}

void MaskSet::validate_unique_labels() const {
  std::set<uint32_t> seen;
  for (const auto& m : masks)
    if (!seen.insert(m.label).second)
      throw std::invalid_argument("duplicate mask label in set");
}

std::vector<double> luma(const Frame& f) {
  std::vector<double> out(size_t(f.width) * f.height);
  const uint8_t* p = f.pixels.data();
  for (size_t i = 0; i < out.size(); ++i, p += 3)
    out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  return out;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("mask_iou: dimension mismatch");
  if (a.area == 0 && b.area == 0) return 0.0;
  // Disjoint bounding boxes cannot intersect.
  if (a.area == 0 || b.area == 0 || a.x1 < b.x0 || b.x1 < a.x0 || a.y1 < b.y0 || b.y1 < a.y0)
    return 0.0;
  uint64_t inter = 0;
  uint32_t yb = uint32_t(std::max(a.y0, b.y0)), ye = uint32_t(std::min(a.y1, b.y1));
  uint32_t wb = uint32_t(std::max(a.x0, b.x0)) / 64, we = uint32_t(std::min(a.x1, b.x1)) / 64;
  for (uint32_t y = yb; y <= ye; ++y) {
    const uint64_t* ra = a.bits.data() + size_t(y) * a.words_per_row;
    const uint64_t* rb = b.bits.data() + size_t(y) * b.words_per_row;
    for (uint32_t w = wb; w <= we; ++w) inter += std::popcount(ra[w] & rb[w]);
  }
  uint64_t uni = uint64_t(a.area) + b.area - inter;
  return double(inter) / double(uni);
}

CameraPose convert_pose_carla_to_ns(const CameraPose& m_cl, const CameraPose& t_trans) {
  if (!mat4_invertible(t_trans))
    throw std::invalid_argument("convert_pose: axis substitution matrix is not invertible");
  CameraPose rz, rx, ry;
  // Rz(pi/2)
  rz.m = {0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  // Rx(-pi/2)
  rx.m = {1, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 1};
  // Ry(pi)
  ry.m = {-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1};
  return mat4_mul(mat4_mul(mat4_mul(mat4_mul(rz, rx), ry), t_trans), m_cl);
}

}  // namespace rfdvc
