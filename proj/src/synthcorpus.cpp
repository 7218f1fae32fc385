#include "boxlabel/synthcorpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "boxlabel/rng.hpp"

namespace boxlabel::synth {
namespace {

constexpr int kMaxAttempts = 1000;

struct Colour {
  double r, g, b;
};

double colour_distance(const Colour& a, const Colour& b) {
  return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) + (a.b - b.b) * (a.b - b.b));
}

bool inside_shape(Shape shape, double u, double v) {
  // (u, v) in [-1, 1]^2 relative to the allotted rectangle
  switch (shape) {
    case Shape::Rectangle: return true;
    case Shape::Ellipse: return u * u + v * v <= 1.0;
    case Shape::RoundedBlob: return u * u * u * u + v * v * v * v <= 1.0;
  }
  return false;
}

SegmentMask rasterize_shape(Shape shape, int x0, int y0, int w, int h, Dims dims) {
  SegmentMask m(dims, 0);
  const double cx = x0 + w / 2.0, cy = y0 + h / 2.0;
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) {
      const double u = (x + 0.5 - cx) / (w / 2.0), v = (y + 0.5 - cy) / (h / 2.0);
      if (inside_shape(shape, u, v)) m.at(x, y) = 1;
    }
  }
  return m;
}

SegmentMask shift(const SegmentMask& m, int dx, int dy) {
  SegmentMask out(m.dims(), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y) && m.dims().contains(x + dx, y + dy)) out.at(x + dx, y + dy) = 1;
  return out;
}

struct Placed {
  Shape shape;
  int class_id;
  Colour colour;
  SegmentMask full;  // unoccluded silhouette
  Box extent;
};

}  // namespace

SceneSpec scene_spec_for(const SceneSpec& base, std::uint64_t index) {
  SceneSpec s = base;
  s.seed = derive_seed({base.seed, index, 0x5ce7eULL});
  return s;
}

Scene generate(const SceneSpec& spec) {
  const Dims dims = spec.canvas;
  if (dims.width < 1 || dims.height < 1 || dims.width > 256 || dims.height > 256) {
    throw Error(ErrorCode::InvalidArgument, "canvas must be between 1x1 and 256x256");
  }
  if (spec.n_objects < 0 || spec.shapes.empty() || spec.n_classes < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid scene spec");
  }
  Rng rng(derive_seed({spec.seed, 0x9e11ULL}));

  // background: base colour plus a gentle horizontal ramp
  const Colour bg_base{rng.uniform(20, 235), rng.uniform(20, 235), rng.uniform(20, 235)};
  const Colour bg_ramp{rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-15, 15)};
  auto background_at = [&](double x) {
    const double t = dims.width > 1 ? x / (dims.width - 1) - 0.5 : 0.0;
    return Colour{bg_base.r + t * bg_ramp.r, bg_base.g + t * bg_ramp.g, bg_base.b + t * bg_ramp.b};
  };

  const int short_side = std::min(dims.width, dims.height);
  const int min_ext = std::max(3, static_cast<int>(std::lround(spec.min_extent * short_side)));
  const int max_ext = std::max(min_ext, static_cast<int>(std::lround(spec.max_extent * short_side)));

  std::vector<Placed> placed;
  std::vector<int> owner(dims.pixel_count(), -1);
  int attempts = 0;
  while (static_cast<int>(placed.size()) < spec.n_objects) {
    if (++attempts > kMaxAttempts) {
      throw Error(ErrorCode::SpecInfeasible,
                  "could not place " + std::to_string(spec.n_objects) + " objects within " +
                      std::to_string(kMaxAttempts) + " attempts");
    }
    Placed p;
    p.shape = spec.shapes[rng.below(spec.shapes.size())];
    p.class_id = rng.uniform_int(1, spec.n_classes);
    const int w = std::min(rng.uniform_int(min_ext, max_ext), dims.width);
    const int h = std::min(rng.uniform_int(min_ext, max_ext), dims.height);
    const int x0 = rng.uniform_int(0, dims.width - w);
    const int y0 = rng.uniform_int(0, dims.height - h);
    p.full = rasterize_shape(p.shape, x0, y0, w, h, dims);
    p.extent = mask_bounds(p.full);
    if (p.extent.area() == 0) continue;

    // colour far enough from local background and from touched objects
    const Colour local = background_at(x0 + w / 2.0);
    bool colour_ok = false;
    for (int c = 0; c < 50 && !colour_ok; ++c) {
      p.colour = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
      colour_ok = colour_distance(p.colour, local) >= spec.colour_separation;
      for (const auto& q : placed) {
        if (!colour_ok) break;
        const Box near{0, q.extent.xmin - max_ext, q.extent.ymin - max_ext, q.extent.xmax + max_ext,
                       q.extent.ymax + max_ext};
        if (box_iou(near, p.extent) > 0.0) {
          colour_ok = colour_distance(p.colour, q.colour) >= spec.colour_separation;
        }
      }
    }
    if (!colour_ok) continue;

    bool ok = true;
    if (!spec.allow_occlusion) {
      // keep a 2px gap between boxes so annotations never overlap
      for (const auto& q : placed) {
        const Box grown{0, q.extent.xmin - 2, q.extent.ymin - 2, q.extent.xmax + 2, q.extent.ymax + 2};
        if (box_iou(grown, p.extent) > 0.0) ok = false;
      }
    } else {
      // occluded objects must stay mostly visible so their boxes stay tight
      for (std::size_t qi = 0; qi < placed.size() && ok; ++qi) {
        std::size_t total = 0, covered = 0;
        for (std::size_t i = 0; i < owner.size(); ++i) {
          if (owner[i] != static_cast<int>(qi)) continue;
          ++total;
          covered += p.full[i] != 0;
        }
        if (total > 0 && static_cast<double>(total - covered) < 0.7 * static_cast<double>(count_foreground(placed[qi].full))) {
          ok = false;
        }
      }
    }
    if (!ok) continue;

    const int id = static_cast<int>(placed.size());
    for (std::size_t i = 0; i < owner.size(); ++i)
      if (p.full[i]) owner[i] = id;
    placed.push_back(std::move(p));
  }

  Scene scene;
  scene.labels = LabelMap(dims, kBackground);
  std::vector<Box> boxes;
  for (std::size_t k = 0; k < placed.size(); ++k) {
    Instance inst;
    inst.class_id = placed[k].class_id;
    inst.mask = SegmentMask(dims, 0);
    for (std::size_t i = 0; i < owner.size(); ++i) {
      if (owner[i] == static_cast<int>(k)) {
        inst.mask[i] = 1;
        scene.labels[i] = static_cast<std::uint8_t>(inst.class_id);
      }
    }
    inst.box = mask_bounds(inst.mask);
    inst.box.class_id = inst.class_id;
    if (spec.allow_occlusion) {
      const double fill = static_cast<double>(count_foreground(inst.mask)) / static_cast<double>(inst.box.area());
      if (fill < 0.55) throw Error(ErrorCode::SpecInfeasible, "occlusion left an instance too sparse inside its box");
    }
    boxes.push_back(inst.box);
    scene.instances.push_back(std::move(inst));
  }
  scene.boxes = order_boxes(boxes, dims);

  // image
  std::vector<Rgb> pixels(dims.pixel_count());
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * dims.width + x;
      const Colour c = owner[i] >= 0 ? placed[static_cast<std::size_t>(owner[i])].colour : background_at(x);
      auto channel = [&](double v) {
        if (spec.texture_noise > 0.0) v += spec.texture_noise * rng.normal();
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      };
      const auto r = channel(c.r);
      const auto g = channel(c.g);
      const auto b = channel(c.b);
      pixels[i] = {r, g, b};
    }
  }
  scene.image = Image(dims, std::move(pixels));

  // oracle boundaries: instance contours, dilated by one pixel
  SegmentMask contour(dims, 0);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const int id = owner[static_cast<std::size_t>(y) * dims.width + x];
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& o : nb) {
        const int qx = x + o[0], qy = y + o[1];
        if (dims.contains(qx, qy) && owner[static_cast<std::size_t>(qy) * dims.width + qx] != id) contour.at(x, y) = 1;
      }
    }
  }
  const SegmentMask thick = dilate(contour, 1);
  scene.boundary = BoundaryMap(dims, 0.0f);
  for (std::size_t i = 0; i < thick.size(); ++i) scene.boundary[i] = thick[i] ? 1.0f : 0.0f;

  // oracle proposals: every GT mask plus perturbed near-misses, shuffled
  for (const auto& inst : scene.instances) {
    scene.proposals.push_back(inst.mask);
    for (int d = 0; d < spec.distractors_per_object; ++d) {
      SegmentMask m;
      switch (d % 3) {
        case 0: m = erode(inst.mask, rng.uniform_int(1, 3)); break;
        case 1: m = dilate(inst.mask, rng.uniform_int(1, 3)); break;
        default: {
          const int dx = rng.uniform_int(2, 4) * (rng.below(2) ? 1 : -1);
          const int dy = rng.uniform_int(2, 4) * (rng.below(2) ? 1 : -1);
          m = shift(inst.mask, dx, dy);
        }
      }
      if (count_foreground(m) > 0) scene.proposals.push_back(std::move(m));
    }
  }
  for (std::size_t i = scene.proposals.size(); i > 1; --i) {
    std::swap(scene.proposals[i - 1], scene.proposals[rng.below(i)]);
  }
  return scene;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, path.string() + ": spec must be an object");
  SceneSpec s;
  try {
    s.canvas.width = doc.value("canvas_width", s.canvas.width);
    s.canvas.height = doc.value("canvas_height", s.canvas.height);
    s.n_objects = doc.value("n_objects", s.n_objects);
    s.colour_separation = doc.value("colour_separation", s.colour_separation);
    s.texture_noise = doc.value("texture_noise", s.texture_noise);
    s.allow_occlusion = doc.value("allow_occlusion", s.allow_occlusion);
    s.seed = doc.value("seed", s.seed);
    s.n_classes = doc.value("n_classes", s.n_classes);
    s.min_extent = doc.value("min_extent", s.min_extent);
    s.max_extent = doc.value("max_extent", s.max_extent);
    s.distractors_per_object = doc.value("distractors_per_object", s.distractors_per_object);
    if (doc.contains("shapes")) {
      s.shapes.clear();
      for (const auto& name : doc.at("shapes")) {
        const auto n = name.get<std::string>();
        if (n == "rectangle") {
          s.shapes.push_back(Shape::Rectangle);
        } else if (n == "ellipse") {
          s.shapes.push_back(Shape::Ellipse);
        } else if (n == "blob") {
          s.shapes.push_back(Shape::RoundedBlob);
        } else {
          throw Error(ErrorCode::ParseError, path.string() + ": unknown shape '" + n + "'");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return s;
}

std::string scene_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", index);
  return buf;
}

io::DatasetManifest write_corpus(const SceneSpec& base, std::size_t count, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (const char* sub : {"images", "annotations", "boundaries", "proposals", "gt"}) fs::create_directories(dir / sub);
  io::DatasetManifest manifest;
  std::vector<io::GtInstance> instances;
  for (std::size_t k = 0; k < count; ++k) {
    const Scene scene = generate(scene_spec_for(base, k));
    const std::string stem = scene_stem(k);
    io::ManifestEntry e;
    e.stem = stem;
    e.image_path = dir / "images" / (stem + ".png");
    e.annotation_path = dir / "annotations" / (stem + ".json");
    e.boundary_path = dir / "boundaries" / (stem + ".png");
    e.proposal_dir = dir / "proposals" / stem;
    e.gt_label_path = dir / "gt" / (stem + ".png");
    e.gt_instances_path = dir / "gt_instances.json";
    io::write_image(scene.image, e.image_path);
    io::write_annotations(e.annotation_path, scene.image.dims(), {scene.boxes.begin(), scene.boxes.end()});
    io::write_boundary_map(scene.boundary, *e.boundary_path);
    io::write_proposals(*e.proposal_dir, scene.proposals);
    io::write_labelmap(scene.labels, *e.gt_label_path);
    for (const auto& inst : scene.instances) instances.push_back({stem, inst.class_id, inst.mask});
    manifest.entries.push_back(std::move(e));
  }
  io::write_gt_instances(dir / "gt_instances.json", instances);
  io::write_manifest(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace boxlabel::synth
