#include "rfdvc/delta_seg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfdvc {

namespace {

struct UnionFind {
  std::vector<int32_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = int32_t(i);
  }
  int32_t find(int32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// 4-connected components over an arbitrary per-pixel key; key < 0 is
// background. Returns the component id image (-1 background) and the
// number of components, ids in scan order of first pixel.
int32_t label_components(const std::vector<int64_t>& key, uint32_t w, uint32_t h,
                         std::vector<int32_t>& comp) {
  UnionFind uf(size_t(w) * h);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      size_t i = size_t(y) * w + x;
      if (key[i] < 0) continue;
      if (x > 0 && key[i - 1] == key[i]) uf.unite(int32_t(i), int32_t(i - 1));
      if (y > 0 && key[i - w] == key[i]) uf.unite(int32_t(i), int32_t(i - w));
    }
  }
  comp.assign(size_t(w) * h, -1);
  std::vector<int32_t> root_to_comp(size_t(w) * h, -1);
  int32_t n = 0;
  for (size_t i = 0; i < key.size(); ++i) {
    if (key[i] < 0) continue;
    int32_t r = uf.find(int32_t(i));
    if (root_to_comp[r] < 0) root_to_comp[r] = n++;
    comp[i] = root_to_comp[r];
  }
  return n;
}

// Moore-neighbor clockwise order (image y grows downward), starting west.
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

template <typename Inside>
std::vector<std::pair<int32_t, int32_t>> moore_trace(int32_t sx, int32_t sy, Inside inside) {
  std::vector<std::pair<int32_t, int32_t>> ring;
  ring.emplace_back(sx, sy);
  // Backtrack starts west of the scan-order start pixel, which is outside.
  int32_t cx = sx, cy = sy;
  int back = 0;
  const int32_t start_x = sx, start_y = sy;
  const int start_back = back;
  bool moved = false;
  size_t guard = 0;
  while (true) {
    if (++guard > 8u * 1024u * 1024u) throw std::runtime_error("boundary trace diverged");
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      int dir = (back + k) % 8;
      int32_t nx = cx + kDx[dir], ny = cy + kDy[dir];
      if (inside(nx, ny)) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    // New backtrack: direction from the new pixel to the last empty
    // neighbor checked, i.e. one step counterclockwise of the arrival
    // direction, re-expressed from the new pixel.
    int32_t nx = cx + kDx[found], ny = cy + kDy[found];
    int prev_dir = (found + 7) % 8;
    int32_t bx = cx + kDx[prev_dir], by = cy + kDy[prev_dir];
    cx = nx;
    cy = ny;
    // Direction index from new current pixel to backtrack point.
    back = 0;
    for (int d = 0; d < 8; ++d) {
      if (cx + kDx[d] == bx && cy + kDy[d] == by) {
        back = d;
        break;
      }
    }
    if (moved && cx == start_x && cy == start_y && back == start_back) break;
    if (cx == start_x && cy == start_y) {
      // Reached start with a different backtrack; Jacob's criterion keeps
      // going, but guard against re-appending the start.
      moved = true;
      if (back == start_back) break;
      continue;
    }
    ring.emplace_back(cx, cy);
    moved = true;
  }
  return ring;
}

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  double dx = bx - ax, dy = by - ay;
  double len2 = dx * dx + dy * dy;
  if (len2 == 0) return std::hypot(px - ax, py - ay);
  double t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

void dp_simplify(const std::vector<std::pair<int32_t, int32_t>>& pts, size_t lo, size_t hi,
                 double eps, std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  double max_d = -1;
  size_t max_i = lo;
  for (size_t i = lo + 1; i < hi; ++i) {
    double d = point_segment_distance(pts[i].first, pts[i].second, pts[lo].first, pts[lo].second,
                                      pts[hi].first, pts[hi].second);
    if (d > max_d) {
      max_d = d;
      max_i = i;
    }
  }
  if (max_d > eps) {
    keep[max_i] = true;
    dp_simplify(pts, lo, max_i, eps, keep);
    dp_simplify(pts, max_i, hi, eps, keep);
  }
}

std::vector<std::pair<int32_t, int32_t>> simplify_ring(
    const std::vector<std::pair<int32_t, int32_t>>& ring, double eps) {
  if (ring.size() <= 3) return ring;
  // Split the closed ring at the point farthest from the start, simplify
  // both chains, rejoin.
  size_t far = 1;
  double best = -1;
  for (size_t i = 1; i < ring.size(); ++i) {
    double d = std::hypot(double(ring[i].first - ring[0].first),
                          double(ring[i].second - ring[0].second));
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<std::pair<int32_t, int32_t>> chain1(ring.begin(), ring.begin() + far + 1);
  std::vector<std::pair<int32_t, int32_t>> chain2(ring.begin() + far, ring.end());
  chain2.push_back(ring[0]);

  auto run = [eps](const std::vector<std::pair<int32_t, int32_t>>& pts) {
    std::vector<bool> keep(pts.size(), false);
    keep.front() = keep.back() = true;
    dp_simplify(pts, 0, pts.size() - 1, eps, keep);
    std::vector<std::pair<int32_t, int32_t>> out;
    for (size_t i = 0; i < pts.size(); ++i)
      if (keep[i]) out.push_back(pts[i]);
    return out;
  };

  auto s1 = run(chain1);
  auto s2 = run(chain2);
  std::vector<std::pair<int32_t, int32_t>> out(s1.begin(), s1.end());
  out.insert(out.end(), s2.begin() + 1, s2.end() - 1);  // endpoints shared
  return out;
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v & 0xff));
  out.push_back(uint8_t(v >> 8));
}

uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0] | (uint16_t(p[1]) << 8)); }

void bresenham(Mask& m, int32_t x0, int32_t y0, int32_t x1, int32_t y1) {
  int32_t dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int32_t sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int32_t err = dx + dy;
  while (true) {
    if (x0 >= 0 && y0 >= 0 && x0 < int32_t(m.width) && y0 < int32_t(m.height))
      m.set(uint32_t(x0), uint32_t(y0));
    if (x0 == x1 && y0 == y1) break;
    int32_t e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void SegParams::validate() const {
  if (!(delta_thr > 0.0 && delta_thr <= 1.0))
    throw std::invalid_argument("delta_thr must be in (0, 1]");
  if (color_quant_levels < 1 || color_quant_levels > 256)
    throw std::invalid_argument("color_quant_levels must be in [1, 256]");
  if (poly_epsilon < 0) throw std::invalid_argument("poly_epsilon must be >= 0");
}

size_t PolygonSet::byte_size() const {
  size_t n = 2;
  for (const auto& p : polys) n += 4 + 4 * p.pts.size();
  return n;
}

std::vector<uint8_t> PolygonSet::serialize() const {
  if (polys.size() > 0xffff) throw std::length_error("too many polygons");
  std::vector<uint8_t> out;
  out.reserve(byte_size());
  put_u16(out, uint16_t(polys.size()));
  for (const auto& p : polys) {
    if (p.pts.size() > 0xffff) throw std::length_error("polygon too complex");
    put_u16(out, p.label);
    put_u16(out, uint16_t(p.pts.size()));
    for (auto [x, y] : p.pts) {
      put_u16(out, x);
      put_u16(out, y);
    }
  }
  return out;
}

PolygonSet PolygonSet::deserialize(const uint8_t* data, size_t len, size_t* consumed) {
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > len) throw std::runtime_error("truncated polygon payload");
  };
  need(2);
  uint16_t count = get_u16(data + pos);
  pos += 2;
  PolygonSet set;
  set.polys.resize(count);
  for (auto& p : set.polys) {
    need(4);
    p.label = get_u16(data + pos);
    uint16_t n = get_u16(data + pos + 2);
    pos += 4;
    need(size_t(n) * 4);
    p.pts.resize(n);
    for (auto& pt : p.pts) {
      pt.first = get_u16(data + pos);
      pt.second = get_u16(data + pos + 2);
      pos += 4;
    }
  }
  if (consumed) *consumed = pos;
  return set;
}

PolygonSet PolygonSet::full_frame(uint32_t width, uint32_t height) {
  PolygonSet set;
  Polygon p;
  p.label = 1;
  p.pts = {{0, 0},
           {uint16_t(width - 1), 0},
           {uint16_t(width - 1), uint16_t(height - 1)},
           {0, uint16_t(height - 1)}};
  set.polys.push_back(std::move(p));
  return set;
}

Mask rasterize_polygons(const PolygonSet& set, uint32_t width, uint32_t height) {
  Mask out(width, height, 1);
  for (const auto& poly : set.polys) {
    const auto& pts = poly.pts;
    if (pts.empty()) continue;
    if (pts.size() < 3) {
      for (size_t i = 0; i + 1 < pts.size(); ++i)
        bresenham(out, pts[i].first, pts[i].second, pts[i + 1].first, pts[i + 1].second);
      if (pts.size() == 1) bresenham(out, pts[0].first, pts[0].second, pts[0].first, pts[0].second);
      continue;
    }
    int32_t ymin = pts[0].second, ymax = pts[0].second;
    for (auto& p : pts) {
      ymin = std::min<int32_t>(ymin, p.second);
      ymax = std::max<int32_t>(ymax, p.second);
    }
    std::vector<double> xs;
    for (int32_t y = std::max(0, ymin); y <= std::min<int32_t>(int32_t(height) - 1, ymax); ++y) {
      xs.clear();
      for (size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        int32_t ya = a.second, yb = b.second;
        if (ya == yb) continue;
        // half-open [min, max) avoids double counting at shared vertices
        if (y < std::min(ya, yb) || y >= std::max(ya, yb)) continue;
        double t = double(y - ya) / double(yb - ya);
        xs.push_back(a.first + t * (b.first - a.first));
      }
      std::sort(xs.begin(), xs.end());
      for (size_t i = 0; i + 1 < xs.size(); i += 2) {
        int32_t xb = int32_t(std::ceil(xs[i] - 1e-9));
        int32_t xe = int32_t(std::floor(xs[i + 1] + 1e-9));
        for (int32_t x = std::max(0, xb); x <= std::min<int32_t>(int32_t(width) - 1, xe); ++x)
          out.set(uint32_t(x), uint32_t(y));
      }
    }
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      bresenham(out, a.first, a.second, b.first, b.second);
    }
  }
  out.finalize();
  return out;
}

MaskSet segment_regions(const Frame& frame, const SegParams& params) {
  params.validate();
  const uint32_t w = frame.width, h = frame.height;
  const int levels = params.color_quant_levels;
  std::vector<int64_t> key(size_t(w) * h);
  const uint8_t* p = frame.pixels.data();
  for (size_t i = 0; i < key.size(); ++i, p += 3) {
    int qr = (int(p[0]) * levels) >> 8;
    int qg = (int(p[1]) * levels) >> 8;
    int qb = (int(p[2]) * levels) >> 8;
    key[i] = (int64_t(qr) << 18) | (int64_t(qg) << 9) | int64_t(qb);
  }
  std::vector<int32_t> comp;
  int32_t n = label_components(key, w, h, comp);

  std::vector<uint32_t> areas(n, 0);
  for (int32_t c : comp)
    if (c >= 0) ++areas[c];

  // Renumber surviving components 1..k in scan order.
  std::vector<int32_t> new_label(n, -1);
  int32_t k = 0;
  for (int32_t c = 0; c < n; ++c)
    if (areas[c] >= params.min_region_area) new_label[c] = ++k;

  MaskSet set;
  set.source = frame.role == FrameRole::Rf ? MaskSet::Source::SegmenterRf
                                           : MaskSet::Source::SegmenterCav;
  set.masks.reserve(size_t(k));
  for (int32_t c = 0; c < n; ++c)
    if (new_label[c] > 0) set.masks.emplace_back(w, h, uint32_t(new_label[c]));
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      int32_t c = comp[size_t(y) * w + x];
      if (c >= 0 && new_label[c] > 0) set.masks[size_t(new_label[c]) - 1].set(x, y);
    }
  }
  for (auto& m : set.masks) m.finalize();
  return set;
}

MaskSet match_delta_masks(const MaskSet& m_rf, const MaskSet& m_cav, const SegParams& params) {
  params.validate();
  for (const auto& a : m_cav.masks)
    for (const auto& b : m_rf.masks)
      if (!a.same_dims(b)) throw std::invalid_argument("match_delta_masks: dimension mismatch");
  MaskSet out;
  out.source = MaskSet::Source::Delta;
  for (const auto& cav : m_cav.masks) {
    double best = 0.0;
    for (const auto& rf : m_rf.masks) {
      best = std::max(best, mask_iou(cav, rf));
      if (best > params.delta_thr) break;
    }
    if (best <= params.delta_thr) out.masks.push_back(cav);
  }
  return out;
}

PolygonSet extract_polygons(const MaskSet& masks, double poly_epsilon) {
  PolygonSet set;
  for (const auto& mask : masks.masks) {
    if (mask.area == 0) continue;
    // Components within the mask bitmap (a mask may be disconnected).
    std::vector<int64_t> key(size_t(mask.width) * mask.height, -1);
    for (uint32_t y = uint32_t(mask.y0); y <= uint32_t(mask.y1); ++y)
      for (uint32_t x = uint32_t(mask.x0); x <= uint32_t(mask.x1); ++x)
        if (mask.test(x, y)) key[size_t(y) * mask.width + x] = 1;
    std::vector<int32_t> comp;
    int32_t n = label_components(key, mask.width, mask.height, comp);
    std::vector<bool> done(n, false);
    for (uint32_t y = 0; y < mask.height && int32_t(std::count(done.begin(), done.end(), true)) < n;
         ++y) {
      for (uint32_t x = 0; x < mask.width; ++x) {
        int32_t c = comp[size_t(y) * mask.width + x];
        if (c < 0 || done[c]) continue;
        done[c] = true;
        auto inside = [&](int32_t px, int32_t py) {
          return px >= 0 && py >= 0 && px < int32_t(mask.width) && py < int32_t(mask.height) &&
                 comp[size_t(py) * mask.width + px] == c;
        };
        auto ring = moore_trace(int32_t(x), int32_t(y), inside);
        auto simple = simplify_ring(ring, poly_epsilon);
        Polygon poly;
        poly.label = uint16_t(std::min<uint32_t>(mask.label, 0xffff));
        poly.pts.reserve(simple.size());
        for (auto [px, py] : simple)
          poly.pts.emplace_back(uint16_t(px), uint16_t(py));
        set.polys.push_back(std::move(poly));
      }
    }
  }
  return set;
}

namespace {

DeltaResult compose_delta(const Frame& f_cav, const Mask& region, const PolygonSet& polys) {
  Frame delta(f_cav.width, f_cav.height, FrameRole::Delta);
  delta.pose = f_cav.pose;
  delta.frame_index = f_cav.frame_index;
  delta.condition = f_cav.condition;
  for (uint32_t y = 0; y < f_cav.height; ++y) {
    for (uint32_t x = 0; x < f_cav.width; ++x) {
      if (!region.test(x, y)) continue;
      const uint8_t* s = f_cav.px(x, y);
      uint8_t* d = delta.px(x, y);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return DeltaResult{std::move(delta), polys};
}

}  // namespace

DeltaResult seg_delta(const Frame& f_rf, const Frame& f_cav, const MaskSet& class_oracle,
                      const SegParams& params) {
  if (!f_rf.same_dims(f_cav)) throw std::invalid_argument("seg_delta: dimension mismatch");
  MaskSet m_rf = segment_regions(f_rf, params);
  MaskSet m_cav = segment_regions(f_cav, params);
  MaskSet diff = match_delta_masks(m_rf, m_cav, params);

  Mask region(f_cav.width, f_cav.height, 1);
  for (const auto& m : diff.masks)
    for (size_t i = 0; i < region.bits.size(); ++i) region.bits[i] |= m.bits[i];
  for (const auto& m : class_oracle.masks) {
    if (m.width != f_cav.width || m.height != f_cav.height)
      throw std::invalid_argument("seg_delta: oracle mask dimension mismatch");
    for (size_t i = 0; i < region.bits.size(); ++i) region.bits[i] |= m.bits[i];
  }
  region.finalize();

  // Polygons follow the connected components of the transmitted region.
  MaskSet region_set;
  region_set.source = MaskSet::Source::Delta;
  if (region.area > 0) region_set.masks.push_back(region);
  PolygonSet polys = extract_polygons(region_set, params.poly_epsilon);
  // extract_polygons already splits per component; relabel sequentially.
  for (size_t i = 0; i < polys.polys.size(); ++i)
    polys.polys[i].label = uint16_t(std::min<size_t>(i + 1, 0xffff));
  return compose_delta(f_cav, region, polys);
}

DeltaResult ideal_delta(const Frame& f_cav, const MaskSet& gt) {
  Mask region(f_cav.width, f_cav.height, 1);
  for (const auto& m : gt.masks) {
    if (m.width != f_cav.width || m.height != f_cav.height)
      throw std::invalid_argument("ideal_delta: mask dimension mismatch");
    for (size_t i = 0; i < region.bits.size(); ++i) region.bits[i] |= m.bits[i];
  }
  region.finalize();
  PolygonSet polys = extract_polygons(gt, 1.0);
  return compose_delta(f_cav, region, polys);
}

}  // namespace rfdvc
