#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/dataio.hpp"

namespace boxlabel::synth {

enum class Shape { Rectangle, Ellipse, RoundedBlob };

struct SceneSpec {
  Dims canvas{96, 96};
  int n_objects = 3;
  std::vector<Shape> shapes{Shape::Rectangle, Shape::Ellipse, Shape::RoundedBlob};
  /// Minimum RGB distance between an object and the background under it
  /// (and any object it touches).
  double colour_separation = 60.0;
  /// Std-dev of per-pixel, per-channel Gaussian texture noise.
  double texture_noise = 4.0;
  bool allow_occlusion = false;
  std::uint64_t seed = 0;
  int n_classes = kDefaultNumClasses;
  /// Object extent range as a fraction of the shorter canvas side.
  double min_extent = 0.15;
  double max_extent = 0.45;
  /// Perturbed copies of every GT mask added to the proposal soup.
  int distractors_per_object = 3;
};

struct Instance {
  int class_id = 0;
  Box box;  // tight bounds of `mask`
  SegmentMask mask;
};

struct Scene {
  Image image;
  LabelMap labels;
  std::vector<Instance> instances;
  BoxSet boxes;
  BoundaryMap boundary;
  std::vector<SegmentMask> proposals;
};

/// Deterministic scene from `spec`. Canvas must be at most 256x256. Throws
/// SpecInfeasible when objects cannot be placed within 1000 attempts.
Scene generate(const SceneSpec& spec);

/// Spec for scene `index` of a corpus: same knobs, seed derived from
/// (spec.seed, index).
SceneSpec scene_spec_for(const SceneSpec& base, std::uint64_t index);

/// Reads a JSON scene spec; every key is optional:
/// canvas_width, canvas_height, n_objects, shapes (["rectangle","ellipse",
/// "blob"]), colour_separation, texture_noise, allow_occlusion, seed,
/// n_classes, min_extent, max_extent, distractors_per_object.
SceneSpec read_scene_spec(const std::filesystem::path& path);

/// Stem of scene `index` in a written corpus.
std::string scene_stem(std::size_t index);

/// Writes `count` scenes under `dir` (images/, annotations/, boundaries/,
/// proposals/<stem>/, gt/, gt_instances.json) plus manifest.json, and
/// returns the manifest.
io::DatasetManifest write_corpus(const SceneSpec& base, std::size_t count, const std::filesystem::path& dir);

}  // namespace boxlabel::synth
