#include "rfdvc/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfdvc/rng.hpp"

namespace rfdvc {

namespace {

constexpr uint64_t kSpriteStream = 0x53505249u;   // sprite parameter stream
constexpr uint64_t kConditionStream = 0xC04Du;    // static condition fields
constexpr uint64_t kRainStream = 0x4A11u;         // per-frame rain streaks

inline uint8_t clamp_u8(int64_t v) { return uint8_t(std::clamp<int64_t>(v, 0, 255)); }

inline uint8_t scale_px(uint8_t v, double s) { return clamp_u8(std::lround(v * s)); }

// Bilinear value noise in [0,1) on a 16-px lattice, bit-exact.
double value_noise16(uint64_t seed, int32_t x, int32_t y) {
  auto corner = [seed](int32_t cx, int32_t cy) {
    return (hash64(seed, uint64_t(uint32_t(cx)), uint64_t(uint32_t(cy))) >> 11) * 0x1.0p-53;
  };
  int32_t gx = x >= 0 ? x / 16 : (x - 15) / 16;
  int32_t gy = y >= 0 ? y / 16 : (y - 15) / 16;
  double fx = (x - gx * 16) / 16.0;
  double fy = (y - gy * 16) / 16.0;
  double n00 = corner(gx, gy), n10 = corner(gx + 1, gy);
  double n01 = corner(gx, gy + 1), n11 = corner(gx + 1, gy + 1);
  double top = n00 + (n10 - n00) * fx;
  double bot = n01 + (n11 - n01) * fx;
  return top + (bot - top) * fy;
}

struct Building {
  int32_t center;
  int32_t half_width;
  int32_t top;
  uint8_t r, g, b;
};

struct Sprite {
  bool vehicle;
  int32_t x0, y0;    // world position at t = 0 (top-left)
  int32_t vx;        // px/frame
  int32_t w, h;
  uint8_t r, g, b;
  bool textured = false;
};

constexpr uint8_t kVehiclePalette[8][3] = {
    {200, 40, 40},  {40, 80, 200},  {230, 230, 230}, {30, 30, 34},
    {220, 180, 40}, {60, 160, 70},  {160, 60, 160},  {235, 130, 30},
};
constexpr uint8_t kPedPalette[4][3] = {
    {210, 70, 60}, {60, 90, 190}, {90, 170, 90}, {200, 150, 60}};

std::vector<Sprite> make_sprites(const SceneSpec& spec) {
  std::vector<Sprite> sprites;
  if (spec.full_coverage) {
    Sprite s{true, 0, 0, 0, int32_t(spec.width), int32_t(spec.height), 120, 130, 140, true};
    sprites.push_back(s);
    return sprites;
  }
  Rng rng(hash64(spec.seed, kSpriteStream));
  int32_t w = int32_t(spec.width), h = int32_t(spec.height);
  int32_t road_top = h * 55 / 100, road_bot = h * 80 / 100;
  for (uint32_t i = 0; i < spec.n_vehicles; ++i) {
    Sprite s;
    s.vehicle = true;
    s.w = 24;
    s.h = 12;
    s.x0 = int32_t(rng.next_int(-30, w + 30));
    s.y0 = int32_t(rng.next_int(road_top + 2, std::max(road_top + 2, road_bot - s.h - 2)));
    int32_t mag = int32_t(rng.next_int(1, 4));
    s.vx = rng.next_bernoulli(0.5) ? mag : -mag;
    const uint8_t* c = kVehiclePalette[rng.next_int(0, 7)];
    s.r = c[0];
    s.g = c[1];
    s.b = c[2];
    sprites.push_back(s);
  }
  for (uint32_t i = 0; i < spec.n_pedestrians; ++i) {
    Sprite s;
    s.vehicle = false;
    s.w = 4;
    s.h = 10;
    s.x0 = int32_t(rng.next_int(-20, w + 20));
    s.y0 = int32_t(rng.next_int(road_bot + 1, std::max(road_bot + 1, h - s.h - 1)));
    s.vx = rng.next_bernoulli(0.5) ? 1 : -1;
    const uint8_t* c = kPedPalette[rng.next_int(0, 3)];
    s.r = c[0];
    s.g = c[1];
    s.b = c[2];
    sprites.push_back(s);
  }
  return sprites;
}

}  // namespace

void SceneSpec::validate() const {
  if (batch_len < 1 || batch_len > 10)
    throw std::invalid_argument("batch_len must be in [1, 10]");
  if (width == 0 || height == 0 || width % 16 != 0 || height % 16 != 0)
    throw std::invalid_argument("scene dimensions must be nonzero multiples of 16");
}

SceneSpec make_scene_spec(uint64_t seed, uint32_t width, uint32_t height, Condition condition,
                          Traffic traffic, uint32_t batch_len) {
  SceneSpec spec;
  spec.seed = seed;
  spec.width = width;
  spec.height = height;
  spec.condition = ConditionTag{condition, traffic};
  spec.batch_len = batch_len;
  spec.background_id = uint32_t(hash64(seed, 0xB6u) % 19);
  switch (traffic) {
    case Traffic::Empty: spec.n_vehicles = 0; spec.n_pedestrians = 0; break;
    case Traffic::Sparse: spec.n_vehicles = 3; spec.n_pedestrians = 2; break;
    case Traffic::Dense: spec.n_vehicles = 8; spec.n_pedestrians = 5; break;
  }
  spec.validate();
  return spec;
}

ProceduralBackground::ProceduralBackground(uint32_t width, uint32_t height, Exec exec)
    : width_(width), height_(height), exec_(exec) {
  Frame probe(width, height, FrameRole::Rf);  // validates dimensions
  (void)probe;
}

Frame ProceduralBackground::render(const CameraPose& pose, uint32_t background_id) const {
  Frame f(width_, height_, FrameRole::Rf);
  f.pose = pose;
  f.condition = ConditionTag{Condition::Morning, Traffic::Empty};

  const int32_t w = int32_t(width_), h = int32_t(height_);
  const int32_t off = int32_t(std::lround(pose.tx()));
  const int32_t road_top = h * 55 / 100, road_bot = h * 80 / 100;
  const uint64_t world = hash64(background_id, 0xB1Du);

  // Building slabs over the world span [-256, w+256].
  Rng brng(hash64(background_id, 0xB11Du));
  int n_b = int(brng.next_int(5, 12));
  std::vector<Building> buildings(n_b);
  for (auto& bld : buildings) {
    bld.center = int32_t(brng.next_int(-256, w + 256));
    bld.half_width = int32_t(brng.next_int(12, 32));
    int32_t bh = int32_t(brng.next_int(h * 15 / 100, h * 45 / 100));
    bld.top = road_top - bh;
    int base = int(brng.next_int(0, 2));
    static constexpr uint8_t facade[3][3] = {{150, 120, 100}, {130, 130, 135}, {170, 150, 120}};
    bld.r = facade[base][0];
    bld.g = facade[base][1];
    bld.b = facade[base][2];
  }

  // Per-column building lookup for the visible range, painter order.
  std::vector<int> col_building(w, -1);
  for (int k = 0; k < n_b; ++k) {
    int32_t lo = buildings[k].center - buildings[k].half_width - off;
    int32_t hi = buildings[k].center + buildings[k].half_width - off;
    for (int32_t x = std::max(0, lo); x <= std::min(w - 1, hi); ++x) col_building[x] = k;
  }

  parallel_for(exec_, h, [&](int64_t yy) {
    int32_t y = int32_t(yy);
    for (int32_t x = 0; x < w; ++x) {
      int32_t u = x + off;  // world column
      int r, g, b;
      if (y < road_top) {
        double t = double(y) / road_top;
        r = int(120 + t * 80);
        g = int(160 + t * 50);
        b = int(215 + t * 10);
        int k = col_building[x];
        if (k >= 0 && y >= buildings[k].top) {
          double shade = 0.85 + 0.15 * double(y - buildings[k].top) /
                                    std::max(1, road_top - buildings[k].top);
          r = int(buildings[k].r * shade);
          g = int(buildings[k].g * shade);
          b = int(buildings[k].b * shade);
        }
      } else if (y < road_bot) {
        int fade = (y - road_top) / 4;
        r = 68 + fade;
        g = 68 + fade;
        b = 72 + fade;
        int32_t mid = (road_top + road_bot) / 2;
        bool dash_on = ((u >= 0 ? u / 24 : (u - 23) / 24) % 2) == 0;
        if (std::abs(y - mid) <= 1 && dash_on) {
          r = 200;
          g = 200;
          b = 60;
        }
      } else {
        r = 150;
        g = 145;
        b = 140;
      }
      double n = value_noise16(world, u, y);
      int tex = int(std::lround((n * 2.0 - 1.0) * 8.0));
      uint8_t* p = f.px(uint32_t(x), uint32_t(y));
      p[0] = clamp_u8(r + tex);
      p[1] = clamp_u8(g + tex);
      p[2] = clamp_u8(b + tex);
    }
  });
  return f;
}

CameraPose camera_pose_at(uint32_t t) { return CameraPose::translation(2.0 * t, 0.0, 0.0); }

RenderedPair render_pair(const SceneSpec& spec, uint32_t t, const BackgroundProvider& provider) {
  spec.validate();
  if (t >= spec.batch_len) throw std::out_of_range("render_pair: frame ordinal out of batch");

  CameraPose pose = camera_pose_at(t);
  Frame rf = provider.render(pose, spec.background_id);
  rf.frame_index = t;

  const int32_t w = int32_t(spec.width), h = int32_t(spec.height);
  const int32_t off = int32_t(std::lround(pose.tx()));

  Frame composite = rf;
  composite.role = FrameRole::Cav;
  std::vector<uint32_t> owner(size_t(w) * h, 0);  // sprite instance per pixel, 0 = background

  std::vector<Sprite> sprites = make_sprites(spec);
  for (size_t i = 0; i < sprites.size(); ++i) {
    const Sprite& s = sprites[i];
    int32_t sx = s.x0 + s.vx * int32_t(t) - off;
    int32_t sy = s.y0;
    int32_t xb = std::max(0, sx), xe = std::min(w, sx + s.w);
    int32_t yb = std::max(0, sy), ye = std::min(h, sy + s.h);
    for (int32_t y = yb; y < ye; ++y) {
      for (int32_t x = xb; x < xe; ++x) {
        uint8_t r = s.r, g = s.g, b = s.b;
        if (s.vehicle && !s.textured) {
          // 2-px darker outline
          bool edge = x - sx < 2 || sx + s.w - 1 - x < 2 || y - sy < 2 || sy + s.h - 1 - y < 2;
          if (edge) {
            r = uint8_t(r / 2);
            g = uint8_t(g / 2);
            b = uint8_t(b / 2);
          }
        }
        if (s.textured) {
          double n = value_noise16(hash64(spec.seed, 0xFEEDu), x + off, y);
          int tex = int(std::lround((n * 2.0 - 1.0) * 12.0));
          r = clamp_u8(r + tex);
          g = clamp_u8(g + tex);
          b = clamp_u8(b + tex);
        }
        uint8_t* p = composite.px(uint32_t(x), uint32_t(y));
        p[0] = r;
        p[1] = g;
        p[2] = b;
        owner[size_t(y) * w + x] = uint32_t(i + 1);
      }
    }
  }

  // Ground truth: per sprite, the pixels it owns that differ from the
  // background render.
  MaskSet gt;
  gt.source = MaskSet::Source::GroundTruth;
  for (size_t i = 0; i < sprites.size(); ++i) {
    Mask m(spec.width, spec.height, uint32_t(i + 1));
    bool any = false;
    for (int32_t y = 0; y < h; ++y) {
      for (int32_t x = 0; x < w; ++x) {
        if (owner[size_t(y) * w + x] != uint32_t(i + 1)) continue;
        const uint8_t* a = composite.px(uint32_t(x), uint32_t(y));
        const uint8_t* bpx = rf.px(uint32_t(x), uint32_t(y));
        if (a[0] != bpx[0] || a[1] != bpx[1] || a[2] != bpx[2]) {
          m.set(uint32_t(x), uint32_t(y));
          any = true;
        }
      }
    }
    if (any) {
      m.finalize();
      gt.masks.push_back(std::move(m));
    }
  }

  uint64_t cond_seed = spec.condition.condition == Condition::Rain
                           ? hash64(spec.seed, kRainStream, t)
                           : hash64(spec.seed, kConditionStream);
  Frame cav = apply_condition(composite, spec.condition.condition, cond_seed);
  cav.role = FrameRole::Cav;
  cav.pose = pose;
  cav.frame_index = t;
  cav.condition = spec.condition;
  return RenderedPair{std::move(cav), std::move(rf), std::move(gt)};
}

Frame apply_condition(const Frame& frame, Condition condition, uint64_t seed) {
  if (frame.role != FrameRole::Cav)
    throw std::invalid_argument("apply_condition expects a Cav frame");
  Frame out = frame;
  const int32_t w = int32_t(frame.width), h = int32_t(frame.height);
  switch (condition) {
    case Condition::Morning:
      break;
    case Condition::Noon:
      for (auto& v : out.pixels) v = scale_px(v, 1.05);
      break;
    case Condition::Evening:
      for (int32_t y = 0; y < h; ++y) {
        for (int32_t x = 0; x < w; ++x) {
          uint8_t* p = out.px(uint32_t(x), uint32_t(y));
          p[0] = clamp_u8(std::lround(p[0] * 0.6) + 10);
          p[1] = clamp_u8(std::lround(p[1] * 0.6));
          p[2] = clamp_u8(std::lround(p[2] * 0.6) - 10);
        }
      }
      break;
    case Condition::Wet:
      for (int32_t y = 0; y < h; ++y) {
        for (int32_t x = 0; x < w; ++x) {
          double factor = 0.9 + 0.2 * value_noise16(seed, x, y);
          uint8_t* p = out.px(uint32_t(x), uint32_t(y));
          p[0] = clamp_u8(std::lround(p[0] * factor));
          p[1] = clamp_u8(std::lround(p[1] * factor));
          p[2] = clamp_u8(std::lround(p[2] * factor));
        }
      }
      break;
    case Condition::Rain: {
      for (auto& v : out.pixels) v = scale_px(v, 0.7);
      uint32_t n_streaks = uint32_t(std::ceil(0.002 * frame.width * frame.height / 12.0));
      Rng rng(seed);
      for (uint32_t s = 0; s < n_streaks; ++s) {
        int32_t x = int32_t(rng.next_int(0, w - 1));
        int32_t y = int32_t(rng.next_int(0, h - 1));
        int32_t len = int32_t(rng.next_int(8, 16));
        for (int32_t i = 0; i < len; ++i) {
          int32_t px = x + i, py = y + i;  // 45 degrees
          if (px < 0 || px >= w || py < 0 || py >= h) break;
          uint8_t* p = out.px(uint32_t(px), uint32_t(py));
          p[0] = 220;
          p[1] = 220;
          p[2] = 220;
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace rfdvc
