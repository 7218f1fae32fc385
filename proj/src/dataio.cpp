#include "boxlabel/dataio.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "boxlabel/png_io.hpp"

namespace boxlabel::io {
namespace {

using nlohmann::json;

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

const json& field(const json& obj, const char* key, const fs::path& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::ParseError, where.string() + ": missing key '" + key + "'");
  }
  return obj.at(key);
}

int int_field(const json& obj, const char* key, const fs::path& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, where.string() + ": '" + key + "' must be an integer");
  return v.get<int>();
}

double number_field(const json& obj, const char* key, const fs::path& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, where.string() + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::ParseError, where.string() + ": '" + key + "' must be finite");
  return d;
}

std::string string_field(const json& obj, const char* key, const fs::path& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw Error(ErrorCode::ParseError, where.string() + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

Box parse_box(const json& obj, int class_id, const fs::path& where) {
  Box b{class_id, int_field(obj, "xmin", where), int_field(obj, "ymin", where), int_field(obj, "xmax", where),
        int_field(obj, "ymax", where)};
  if (b.xmax <= b.xmin || b.ymax <= b.ymin) {
    throw Error(ErrorCode::DegenerateBox, where.string() + ": box has non-positive extent");
  }
  return b;
}

json box_json(const Box& b) {
  return json{{"xmin", b.xmin}, {"ymin", b.ymin}, {"xmax", b.xmax}, {"ymax", b.ymax}};
}

Dims raw_dims(const png::RawImage& raw) {
  return Dims{static_cast<int>(raw.width), static_cast<int>(raw.height)};
}

std::string relative_to(const fs::path& target, const fs::path& base_dir) {
  return fs::relative(fs::absolute(target), fs::absolute(base_dir)).generic_string();
}

fs::path resolve(const fs::path& base_dir, const std::string& rel) {
  const fs::path p(rel);
  return (p.is_absolute() ? p : base_dir / p).lexically_normal();
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::IoError, "missing file " + p.string());
}

}  // namespace

Annotation read_annotations(const fs::path& path, int n_classes) {
  const json doc = load_json(path);
  Annotation a;
  a.dims = Dims{int_field(doc, "image_width", path), int_field(doc, "image_height", path)};
  if (a.dims.width < 1 || a.dims.height < 1) throw Error(ErrorCode::ParseError, path.string() + ": bad image size");
  const json& boxes = field(doc, "boxes", path);
  if (!boxes.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": 'boxes' must be an array");
  for (const auto& jb : boxes) {
    const int cls = int_field(jb, "class_id", path);
    if (cls < 1 || cls > n_classes) {
      throw Error(ErrorCode::UnknownClassId, path.string() + ": class id " + std::to_string(cls) + " outside [1, " +
                                                 std::to_string(n_classes) + "]");
    }
    a.boxes.push_back(clip_box(parse_box(jb, cls, path), a.dims));
  }
  return a;
}

void write_annotations(const fs::path& path, Dims dims, const std::vector<Box>& boxes) {
  json doc{{"image_width", dims.width}, {"image_height", dims.height}, {"boxes", json::array()}};
  for (const auto& b : boxes) {
    json jb = box_json(b);
    jb["class_id"] = b.class_id;
    doc["boxes"].push_back(std::move(jb));
  }
  save_json(path, doc);
}

Image read_image(const fs::path& path) {
  const auto raw = png::read(path);
  const Dims dims = raw_dims(raw);
  std::vector<Rgb> px(dims.pixel_count());
  auto to8 = [&](std::uint16_t v) -> std::uint8_t {
    if (raw.bit_depth == 16) return static_cast<std::uint8_t>(v >> 8);
    if (raw.bit_depth < 8 && raw.colour != png::ColourType::Palette) {
      return static_cast<std::uint8_t>(v * 255 / ((1 << raw.bit_depth) - 1));
    }
    return static_cast<std::uint8_t>(v);
  };
  for (std::size_t i = 0; i < px.size(); ++i) {
    switch (raw.colour) {
      case png::ColourType::Gray:
      case png::ColourType::GrayAlpha: {
        const auto g = to8(raw.sample(i, 0));
        px[i] = {g, g, g};
        break;
      }
      case png::ColourType::Rgb:
      case png::ColourType::Rgba:
        px[i] = {to8(raw.sample(i, 0)), to8(raw.sample(i, 1)), to8(raw.sample(i, 2))};
        break;
      case png::ColourType::Palette: {
        const auto idx = raw.sample(i, 0);
        if (idx >= raw.palette.size()) throw Error(ErrorCode::FormatError, path.string() + ": palette index out of range");
        const auto& c = raw.palette[idx];
        px[i] = {c[0], c[1], c[2]};
        break;
      }
    }
  }
  return Image(dims, std::move(px));
}

void write_image(const Image& image, const fs::path& path) {
  std::vector<std::uint8_t> samples;
  samples.reserve(image.pixels().size() * 3);
  for (const Rgb& c : image.pixels()) {
    samples.push_back(c.r);
    samples.push_back(c.g);
    samples.push_back(c.b);
  }
  png::write(path, static_cast<std::uint32_t>(image.width()), static_cast<std::uint32_t>(image.height()),
             png::ColourType::Rgb, samples);
}

const std::array<Rgb, 256>& pascal_palette() {
  static const std::array<Rgb, 256> palette = [] {
    std::array<Rgb, 256> p{};
    for (int i = 0; i < 256; ++i) {
      int r = 0, g = 0, b = 0, c = i;
      for (int j = 0; j < 8; ++j) {
        r |= ((c >> 0) & 1) << (7 - j);
        g |= ((c >> 1) & 1) << (7 - j);
        b |= ((c >> 2) & 1) << (7 - j);
        c >>= 3;
      }
      p[static_cast<std::size_t>(i)] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                        static_cast<std::uint8_t>(b)};
    }
    return p;
  }();
  return palette;
}

LabelMap read_labelmap(const fs::path& path) {
  const auto raw = png::read(path);
  const bool single = raw.colour == png::ColourType::Gray || raw.colour == png::ColourType::Palette;
  if (!single || raw.bit_depth != 8) {
    throw Error(ErrorCode::FormatError, path.string() + ": label maps must be 8-bit indexed or grayscale PNGs");
  }
  return LabelMap(raw_dims(raw), raw.samples);
}

void write_labelmap(const LabelMap& map, const fs::path& path) {
  std::vector<std::array<std::uint8_t, 3>> palette;
  for (const Rgb& c : pascal_palette()) palette.push_back({c.r, c.g, c.b});
  png::write(path, static_cast<std::uint32_t>(map.width()), static_cast<std::uint32_t>(map.height()),
             png::ColourType::Palette, map.storage(), palette);
}

BoundaryMap read_boundary_map(const fs::path& path) {
  const auto raw = png::read(path);
  if (raw.colour != png::ColourType::Gray || (raw.bit_depth != 8 && raw.bit_depth != 16)) {
    throw Error(ErrorCode::FormatError, path.string() + ": boundary maps must be 8- or 16-bit grayscale PNGs");
  }
  const double scale = raw.bit_depth == 16 ? 65535.0 : 255.0;
  BoundaryMap out(raw_dims(raw), 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(raw.sample(i, 0) / scale);
  return out;
}

void write_boundary_map(const BoundaryMap& map, const fs::path& path) {
  std::vector<std::uint8_t> samples;
  samples.reserve(map.size() * 2);
  for (float v : map.values()) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 65535.0));
    samples.push_back(static_cast<std::uint8_t>(q >> 8));
    samples.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  png::write(path, static_cast<std::uint32_t>(map.width()), static_cast<std::uint32_t>(map.height()),
             png::ColourType::Gray, samples, {}, 16);
}

SegmentMask read_mask(const fs::path& path) {
  const auto raw = png::read(path);
  if (raw.colour != png::ColourType::Gray) {
    throw Error(ErrorCode::FormatError, path.string() + ": masks must be grayscale PNGs");
  }
  const double max_value = raw.bit_depth == 16 ? 65535.0 : static_cast<double>((1 << raw.bit_depth) - 1);
  SegmentMask out(raw_dims(raw), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw.sample(i, 0) * 255.0 / max_value > 127.0 ? 1 : 0;
  return out;
}

void write_mask(const SegmentMask& mask, const fs::path& path) {
  std::vector<std::uint8_t> samples(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) samples[i] = mask[i] ? 255 : 0;
  png::write(path, static_cast<std::uint32_t>(mask.width()), static_cast<std::uint32_t>(mask.height()),
             png::ColourType::Gray, samples);
}

ProposalSet read_proposals(const fs::path& dir, Dims dims, const std::string& manifest_name) {
  const fs::path manifest = dir / manifest_name;
  const json doc = load_json(manifest);
  const json& masks = field(doc, "masks", manifest);
  if (!masks.is_array()) throw Error(ErrorCode::ParseError, manifest.string() + ": 'masks' must be an array");
  ProposalSet out;
  for (const auto& m : masks) {
    if (!m.is_string()) throw Error(ErrorCode::ParseError, manifest.string() + ": mask entries must be strings");
    const fs::path p = resolve(dir, m.get<std::string>());
    SegmentMask mask = read_mask(p);
    if (mask.dims() != dims) throw Error(ErrorCode::DimensionMismatch, p.string() + ": proposal size differs from image");
    out.push_back(std::move(mask));
  }
  return out;
}

void write_proposals(const fs::path& dir, const ProposalSet& proposals, const std::string& manifest_name) {
  fs::create_directories(dir);
  json doc{{"masks", json::array()}};
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const std::string name = "m" + std::to_string(i) + ".png";
    write_mask(proposals[i], dir / name);
    doc["masks"].push_back(name);
  }
  save_json(dir / manifest_name, doc);
}

DetectionSet read_detections(const fs::path& path) {
  const json doc = load_json(path);
  const json& list = field(doc, "detections", path);
  if (!list.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": 'detections' must be an array");
  const fs::path dir = path.parent_path();
  DetectionSet out;
  for (const auto& jd : list) {
    Detection d;
    d.class_id = int_field(jd, "class_id", path);
    d.score = number_field(jd, "score", path);
    d.box = parse_box(field(jd, "box", path), d.class_id, path);
    if (jd.contains("image")) d.image = string_field(jd, "image", path);
    if (jd.contains("mask") && !jd.at("mask").is_null()) d.mask = read_mask(resolve(dir, string_field(jd, "mask", path)));
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

void write_detections(const fs::path& path, const DetectionSet& detections) {
  json doc{{"detections", json::array()}};
  const std::string stem = path.stem().string();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    json jd{{"class_id", d.class_id}, {"score", d.score}, {"box", box_json(d.box)}};
    if (!d.image.empty()) jd["image"] = d.image;
    if (d.mask) {
      const std::string name = stem + "_masks/" + std::to_string(i) + ".png";
      fs::create_directories(path.parent_path() / (stem + "_masks"));
      write_mask(*d.mask, path.parent_path() / name);
      jd["mask"] = name;
    }
    doc["detections"].push_back(std::move(jd));
  }
  save_json(path, doc);
}

std::vector<GtInstance> read_gt_instances(const fs::path& path) {
  const json doc = load_json(path);
  const json& list = field(doc, "instances", path);
  if (!list.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": 'instances' must be an array");
  std::vector<GtInstance> out;
  for (const auto& ji : list) {
    GtInstance g;
    if (ji.contains("image")) g.image = string_field(ji, "image", path);
    g.class_id = int_field(ji, "class_id", path);
    g.mask = read_mask(resolve(path.parent_path(), string_field(ji, "mask", path)));
    out.push_back(std::move(g));
  }
  return out;
}

void write_gt_instances(const fs::path& path, const std::vector<GtInstance>& instances) {
  json doc{{"instances", json::array()}};
  const std::string stem = path.stem().string();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string name = stem + "_masks/" + std::to_string(i) + ".png";
    fs::create_directories(path.parent_path() / (stem + "_masks"));
    write_mask(instances[i].mask, path.parent_path() / name);
    json ji{{"class_id", instances[i].class_id}, {"mask", name}};
    if (!instances[i].image.empty()) ji["image"] = instances[i].image;
    doc["instances"].push_back(std::move(ji));
  }
  save_json(path, doc);
}

DatasetManifest read_manifest(const fs::path& path) {
  const json doc = load_json(path);
  const json& list = field(doc, "entries", path);
  if (!list.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": 'entries' must be an array");
  const fs::path dir = path.parent_path();
  DatasetManifest m;
  std::set<std::string> stems;
  for (const auto& je : list) {
    ManifestEntry e;
    e.image_path = resolve(dir, string_field(je, "image_path", path));
    e.annotation_path = resolve(dir, string_field(je, "annotation_path", path));
    require_exists(e.image_path);
    require_exists(e.annotation_path);
    auto optional_path = [&](const char* key, std::optional<fs::path>& slot) {
      if (!je.contains(key) || je.at(key).is_null()) return;
      slot = resolve(dir, string_field(je, key, path));
      require_exists(*slot);
    };
    optional_path("boundary_path", e.boundary_path);
    optional_path("proposal_dir", e.proposal_dir);
    optional_path("gt_label_path", e.gt_label_path);
    optional_path("gt_instances", e.gt_instances_path);
    e.stem = je.contains("id") ? string_field(je, "id", path) : e.image_path.stem().string();
    if (!stems.insert(e.stem).second) throw Error(ErrorCode::ParseError, path.string() + ": duplicate entry id " + e.stem);
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  json doc{{"entries", json::array()}};
  for (const auto& e : manifest.entries) {
    json je{{"id", e.stem},
            {"image_path", relative_to(e.image_path, dir)},
            {"annotation_path", relative_to(e.annotation_path, dir)}};
    if (e.boundary_path) je["boundary_path"] = relative_to(*e.boundary_path, dir);
    if (e.proposal_dir) je["proposal_dir"] = relative_to(*e.proposal_dir, dir);
    if (e.gt_label_path) je["gt_label_path"] = relative_to(*e.gt_label_path, dir);
    if (e.gt_instances_path) je["gt_instances"] = relative_to(*e.gt_instances_path, dir);
    doc["entries"].push_back(std::move(je));
  }
  save_json(path, doc);
}

Sample load_sample(const ManifestEntry& entry, int n_classes) {
  Sample s{entry, read_image(entry.image_path), read_annotations(entry.annotation_path, n_classes), {}};
  if (s.annotation.dims != s.image.dims()) {
    throw Error(ErrorCode::DimensionMismatch, entry.annotation_path.string() + ": annotated size differs from the image");
  }
  s.boxes = order_boxes(s.annotation.boxes, s.image.dims());
  return s;
}

BoundaryMap sobel_boundary(const Image& image) {
  const int w = image.width(), h = image.height();
  std::vector<double> lum(image.dims().pixel_count());
  for (std::size_t i = 0; i < lum.size(); ++i) {
    const Rgb& c = image.pixels()[i];
    lum[i] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  }
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return lum[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<double> mag(lum.size());
  double top = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
      const double m = std::sqrt(gx * gx + gy * gy);
      mag[static_cast<std::size_t>(y) * w + x] = m;
      top = std::max(top, m);
    }
  }
  BoundaryMap out(image.dims(), 0.0f);
  if (top > 0.0) {
    for (std::size_t i = 0; i < mag.size(); ++i) out[i] = static_cast<float>(mag[i] / top);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

}  // namespace boxlabel::io
