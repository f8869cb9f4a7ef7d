#pragma once

#include <cstdint>

#include "rfdvc/parallel.hpp"
#include "rfdvc/types.hpp"

namespace rfdvc {

// Deterministic scene description. Same seed + spec produces bit-identical
// output everywhere.
struct SceneSpec {
  uint64_t seed = 1;
  uint32_t width = 320;
  uint32_t height = 192;
  uint32_t n_vehicles = 0;
  uint32_t n_pedestrians = 0;
  ConditionTag condition;
  uint32_t batch_len = 10;  // transmission batch, 1..10
  uint32_t background_id = 0;
  // Stress case: a single frame-filling static vehicle (the traffic-jam
  // wall), replacing the regular sprite population.
  bool full_coverage = false;

  void validate() const;  // throws std::invalid_argument
};

// Maps a traffic level to sprite counts and picks a background area from
// the seed.
SceneSpec make_scene_spec(uint64_t seed, uint32_t width, uint32_t height, Condition condition,
                          Traffic traffic, uint32_t batch_len = 10);

// Renders the empty static scene for a camera pose. Deterministic in
// (pose, background_id) and shared verbatim by sender and receiver; never
// contains dynamic objects.
class BackgroundProvider {
 public:
  virtual ~BackgroundProvider() = default;
  virtual Frame render(const CameraPose& pose, uint32_t background_id) const = 0;
};

// Procedural implementation: sky gradient, textured building slabs, road
// band with lane dashes, sidewalk, all anchored to world coordinates so
// the scene pans coherently with the camera.
class ProceduralBackground : public BackgroundProvider {
 public:
  ProceduralBackground(uint32_t width, uint32_t height, Exec exec = Exec::Parallel);
  Frame render(const CameraPose& pose, uint32_t background_id) const override;

 private:
  uint32_t width_;
  uint32_t height_;
  Exec exec_;
};

// Camera pose for frame t: constant 2 px/frame pan along +x.
CameraPose camera_pose_at(uint32_t t);

struct RenderedPair {
  Frame cav;    // background + sprites + condition transform
  Frame rf;     // background only, Morning (training condition)
  MaskSet gt;   // one mask per visible sprite; labels 1..n_vehicles are
                // vehicles, higher labels are pedestrians
};

// Produces the CAV/RF pair and ground truth for frame t of the batch.
// Ground-truth masks cover exactly the pixels where the pre-condition
// composite differs from the background.
RenderedPair render_pair(const SceneSpec& spec, uint32_t t, const BackgroundProvider& provider);

// Environmental transform applied to CAV-frames. Morning is identity; the
// Wet noise field and Rain streak placement are functions of the seed.
Frame apply_condition(const Frame& frame, Condition condition, uint64_t seed);

}  // namespace rfdvc
