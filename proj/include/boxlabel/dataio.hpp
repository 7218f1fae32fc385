#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxlabel/core.hpp"

namespace boxlabel::io {

namespace fs = std::filesystem;

/// Parsed annotation file: image size plus validated, clipped boxes in file
/// order (use order_boxes for painting order).
struct Annotation {
  Dims dims;
  std::vector<Box> boxes;
};

/// Throws ParseError, DegenerateBox or UnknownClassId (class outside [1, C]).
Annotation read_annotations(const fs::path& path, int n_classes = kDefaultNumClasses);
void write_annotations(const fs::path& path, Dims dims, const std::vector<Box>& boxes);

/// Any PNG colour type is accepted; 16-bit samples keep their high byte.
Image read_image(const fs::path& path);
void write_image(const Image& image, const fs::path& path);

/// 256-entry palette: the standard Pascal colour map, index 255 = (224,224,192).
const std::array<Rgb, 256>& pascal_palette();

/// Indexed or grayscale 8-bit PNG, raw indices. FormatError otherwise.
LabelMap read_labelmap(const fs::path& path);
void write_labelmap(const LabelMap& map, const fs::path& path);

/// 8- or 16-bit grayscale, scaled by the largest representable value.
BoundaryMap read_boundary_map(const fs::path& path);
/// Stored as 16-bit grayscale; values are clamped to [0, 1].
void write_boundary_map(const BoundaryMap& map, const fs::path& path);

/// Grayscale PNG thresholded at > 127 (on the 8-bit scale).
SegmentMask read_mask(const fs::path& path);
/// Written as 8-bit grayscale 0/255.
void write_mask(const SegmentMask& mask, const fs::path& path);

using ProposalSet = std::vector<SegmentMask>;

inline constexpr const char* kProposalManifestName = "proposals.json";

/// Reads `dir/manifest_name` ({"masks":[...]}, paths relative to dir).
/// Throws DimensionMismatch when a mask differs from `dims`.
ProposalSet read_proposals(const fs::path& dir, Dims dims, const std::string& manifest_name = kProposalManifestName);
void write_proposals(const fs::path& dir, const ProposalSet& proposals,
                     const std::string& manifest_name = kProposalManifestName);

struct Detection {
  std::string image;  // image stem; empty for single-image files
  int class_id = 1;
  double score = 0.0;
  Box box;
  std::optional<SegmentMask> mask;
};
using DetectionSet = std::vector<Detection>;

/// Detections sorted by descending score (stable). Mask paths are relative to
/// the file's directory.
DetectionSet read_detections(const fs::path& path);
/// Masks are written to <file stem>_masks/<index>.png next to the file.
void write_detections(const fs::path& path, const DetectionSet& detections);

struct GtInstance {
  std::string image;
  int class_id = 1;
  SegmentMask mask;
};

/// {"instances":[{"image":stem,"class_id":c,"mask":path}]}; masks are
/// written like detection masks.
std::vector<GtInstance> read_gt_instances(const fs::path& path);
void write_gt_instances(const fs::path& path, const std::vector<GtInstance>& instances);

struct ManifestEntry {
  std::string stem;
  fs::path image_path;
  fs::path annotation_path;
  std::optional<fs::path> boundary_path;
  std::optional<fs::path> proposal_dir;
  std::optional<fs::path> gt_label_path;
  std::optional<fs::path> gt_instances_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Paths in the file are relative to its directory and are returned resolved.
/// Throws IoError if a referenced file is missing, ParseError on bad JSON or
/// duplicate stems.
DatasetManifest read_manifest(const fs::path& path);
/// Writes paths relative to the manifest's directory.
void write_manifest(const fs::path& path, const DatasetManifest& manifest);

/// Everything one manifest entry points at, loaded and size-checked.
struct Sample {
  ManifestEntry entry;
  Image image;
  Annotation annotation;
  BoxSet boxes;
};
Sample load_sample(const ManifestEntry& entry, int n_classes = kDefaultNumClasses);

/// Normalised Sobel gradient magnitude of the luminance; a stand-in boundary
/// map when no detector output is available.
BoundaryMap sobel_boundary(const Image& image);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

}  // namespace boxlabel::io
