#include "boxlabel/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boxlabel/dataio.hpp"
#include "boxlabel/denoise.hpp"
#include "boxlabel/log.hpp"
#include "boxlabel/metrics.hpp"
#include "boxlabel/parallel.hpp"
#include "boxlabel/pipeline.hpp"
#include "boxlabel/rng.hpp"
#include "boxlabel/synthcorpus.hpp"

#ifndef BOXLABEL_VERSION
#define BOXLABEL_VERSION "0.0.0"
#endif

namespace boxlabel::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Raised for invalid flag combinations found after CLI11 parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-image seeds depend on the image id only, never on the worker.
std::uint64_t image_seed(std::uint64_t base, const std::string& stem) { return derive_seed({base, fnv1a(stem)}); }

int resolve_threads(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 1) throw UsageError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("BOXLABEL_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError("BOXLABEL_THREADS must be a positive integer");
  }
  return 1;
}

std::vector<double> parse_double_list(const std::string& list, const char* flag) {
  std::vector<double> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

ojson config_json(const WeakLabelConfig& c) {
  return ojson{{"vote_fg_thresh", c.vote_fg_thresh},
               {"vote_bg_thresh", c.vote_bg_thresh},
               {"n_perturbations", c.n_perturbations},
               {"jitter_frac", c.jitter_frac},
               {"margin_min", c.margin_min},
               {"margin_max", c.margin_max},
               {"margin_default", c.margin_default},
               {"inner_region_frac", c.inner_region_frac},
               {"outlier_iou_thresh", c.outlier_iou_thresh},
               {"gmm_components", c.gmm_components},
               {"grabcut_iters", c.grabcut_iters},
               {"rng_seed", c.rng_seed},
               {"n_classes", c.n_classes}};
}

ojson grabcut_json(const grabcut::Params& p) {
  return ojson{{"lambda", p.lambda}, {"gamma_boundary", p.gamma_boundary}};
}

ojson crf_json(const crf::Params& p) {
  return ojson{{"w_appearance", p.w_appearance}, {"theta_alpha", p.theta_alpha}, {"theta_beta", p.theta_beta},
               {"w_smooth", p.w_smooth},         {"theta_gamma", p.theta_gamma}, {"iterations", p.iterations},
               {"unary_confidence", p.unary_confidence}};
}

ojson entry_digests(const io::ManifestEntry& e) {
  ojson d{{"image", io::sha256_file(e.image_path)}, {"annotation", io::sha256_file(e.annotation_path)}};
  if (e.boundary_path) d["boundary"] = io::sha256_file(*e.boundary_path);
  if (e.proposal_dir) d["proposals"] = io::sha256_file(*e.proposal_dir / io::kProposalManifestName);
  if (e.gt_label_path) d["gt_labels"] = io::sha256_file(*e.gt_label_path);
  return d;
}

void write_json_file(const fs::path& path, const ojson& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_metadata(const fs::path& out_dir, const std::string& command, ojson settings, const fs::path& manifest_path,
                    const io::DatasetManifest& manifest, std::uint64_t seed) {
  ojson doc;
  doc["tool"] = "boxlabel";
  doc["version"] = BOXLABEL_VERSION;
  doc["command"] = command;
  doc["rng_seed"] = seed;
  doc["settings"] = std::move(settings);
  doc["manifest_digest"] = io::sha256_file(manifest_path);
  ojson inputs = ojson::object();
  for (const auto& e : manifest.entries) inputs[e.stem] = entry_digests(e);
  doc["inputs"] = std::move(inputs);
  write_json_file(out_dir / "metadata.json", doc);
}

crf::Params add_crf_options(CLI::App* app, crf::Params& p) {
  app->add_option("--crf-w-appearance", p.w_appearance, "Appearance kernel weight")->capture_default_str();
  app->add_option("--crf-theta-alpha", p.theta_alpha, "Appearance kernel spatial width (px)")->capture_default_str();
  app->add_option("--crf-theta-beta", p.theta_beta, "Appearance kernel colour width")->capture_default_str();
  app->add_option("--crf-w-smooth", p.w_smooth, "Smoothness kernel weight")->capture_default_str();
  app->add_option("--crf-theta-gamma", p.theta_gamma, "Smoothness kernel width (px)")->capture_default_str();
  app->add_option("--crf-iterations", p.iterations, "Mean-field iterations")->capture_default_str();
  app->add_option("--crf-confidence", p.unary_confidence, "Unary confidence of a hard label")->capture_default_str();
  return p;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string method;
  fs::path manifest;
  fs::path out;
  bool boundaries = false;
  bool proposals = false;
  std::uint64_t seed = 0;
  int runs = 150;
  std::optional<int> threads;
  int classes = kDefaultNumClasses;
  grabcut::Params grabcut;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const auto method = pipeline::parse_method(o.method);
  if (pipeline::needs_proposals(method) && !o.proposals) {
    throw Error(ErrorCode::InvalidArgument, "method " + o.method + " requires --proposals");
  }
  const int threads = resolve_threads(o.threads);
  WeakLabelConfig cfg;
  cfg.rng_seed = o.seed;
  cfg.n_perturbations = o.runs;
  cfg.n_classes = o.classes;
  cfg.validate();

  const auto manifest = io::read_manifest(o.manifest);
  fs::create_directories(o.out);
  const bool wants_boundary = pipeline::needs_boundaries(method);
  if (wants_boundary && !o.boundaries) {
    log_warning("--boundaries not given; using Sobel gradient boundaries for " + o.method);
  }
  parallel_for(manifest.entries.size(), threads, [&](std::size_t k) {
    const auto& entry = manifest.entries[k];
    const io::Sample s = io::load_sample(entry, cfg.n_classes);
    std::optional<BoundaryMap> boundary;
    if (wants_boundary) {
      if (o.boundaries && entry.boundary_path) {
        boundary = io::read_boundary_map(*entry.boundary_path);
        if (boundary->dims() != s.image.dims()) {
          throw Error(ErrorCode::DimensionMismatch, entry.boundary_path->string() + ": size differs from the image");
        }
      } else {
        if (o.boundaries) log_warning(entry.stem + ": no boundary map in manifest; using Sobel gradient boundaries");
        boundary = io::sobel_boundary(s.image);
      }
    }
    std::optional<io::ProposalSet> props;
    if (pipeline::needs_proposals(method)) {
      if (entry.proposal_dir) {
        props = io::read_proposals(*entry.proposal_dir, s.image.dims());
      } else {
        log_warning(entry.stem + ": no proposals in manifest");
        props = io::ProposalSet{};
      }
    }
    WeakLabelConfig image_cfg = cfg;
    image_cfg.rng_seed = image_seed(cfg.rng_seed, entry.stem);
    pipeline::Inputs in{&s.image, &s.boxes, boundary ? &*boundary : nullptr, props ? &*props : nullptr};
    const LabelMap labels = pipeline::generate_labels(method, in, image_cfg, o.grabcut);
    io::write_labelmap(labels, o.out / (entry.stem + ".png"));
  });

  ojson settings{{"method", o.method},
                 {"boundaries", o.boundaries},
                 {"proposals", o.proposals},
                 {"config", config_json(cfg)},
                 {"grabcut", grabcut_json(o.grabcut)}};
  write_metadata(o.out, "gen", std::move(settings), o.manifest, manifest, cfg.rng_seed);
  out << "wrote " << manifest.entries.size() << " label maps to " << o.out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- denoise

struct DenoiseOptions {
  fs::path pred;
  fs::path initial;
  fs::path manifest;
  fs::path out;
  std::string stages = "1,2,3";
  double iou_thresh = 0.5;
  std::optional<int> threads;
  int classes = kDefaultNumClasses;
  crf::Params crf;
};

denoise::Stages parse_stages(const std::string& list) {
  try {
    return denoise::Stages::parse(list);
  } catch (const Error& e) {
    throw UsageError(std::string("--stages: ") + e.what());
  }
}

int cmd_denoise(const DenoiseOptions& o, std::ostream& out) {
  const auto stages = parse_stages(o.stages);
  const int threads = resolve_threads(o.threads);
  WeakLabelConfig cfg;
  cfg.outlier_iou_thresh = o.iou_thresh;
  cfg.n_classes = o.classes;
  cfg.validate();
  o.crf.validate();

  const auto manifest = io::read_manifest(o.manifest);
  fs::create_directories(o.out);
  parallel_for(manifest.entries.size(), threads, [&](std::size_t k) {
    const auto& entry = manifest.entries[k];
    const io::Sample s = io::load_sample(entry, cfg.n_classes);
    const LabelMap pred = io::read_labelmap(o.pred / (entry.stem + ".png"));
    const LabelMap initial = io::read_labelmap(o.initial / (entry.stem + ".png"));
    const LabelMap labels = denoise::run_round(pred, s.boxes, initial, s.image, cfg, o.crf, stages);
    io::write_labelmap(labels, o.out / (entry.stem + ".png"));
  });

  ojson settings{{"stages", o.stages}, {"config", config_json(cfg)}, {"crf", crf_json(o.crf)}};
  ojson pred_digests = ojson::object(), init_digests = ojson::object();
  for (const auto& e : manifest.entries) {
    pred_digests[e.stem] = io::sha256_file(o.pred / (e.stem + ".png"));
    init_digests[e.stem] = io::sha256_file(o.initial / (e.stem + ".png"));
  }
  settings["pred_digests"] = std::move(pred_digests);
  settings["initial_digests"] = std::move(init_digests);
  write_metadata(o.out, "denoise", std::move(settings), o.manifest, manifest, cfg.rng_seed);
  out << "wrote " << manifest.entries.size() << " label maps to " << o.out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalSemanticOptions {
  fs::path pred;
  fs::path gt;
  int classes = kDefaultNumClasses + 1;
  std::optional<fs::path> out;
};

void emit_report(const std::string& json, const std::optional<fs::path>& file, std::ostream& out) {
  out << json << '\n';
  if (file) {
    if (file->has_parent_path()) fs::create_directories(file->parent_path());
    std::ofstream f(*file);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + file->string());
    f << json << '\n';
  }
}

int cmd_eval_semantic(const EvalSemanticOptions& o, std::ostream& out) {
  if (!fs::is_directory(o.gt)) throw Error(ErrorCode::IoError, "ground-truth directory " + o.gt.string() + " not found");
  std::vector<fs::path> names;
  for (const auto& f : fs::directory_iterator(o.gt))
    if (f.is_regular_file() && f.path().extension() == ".png") names.push_back(f.path().filename());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error(ErrorCode::EmptyDataset, "no PNG label maps in " + o.gt.string());
  std::vector<LabelMap> preds, gts;
  for (const auto& n : names) {
    if (!fs::exists(o.pred / n)) throw Error(ErrorCode::IoError, "missing prediction " + (o.pred / n).string());
    preds.push_back(io::read_labelmap(o.pred / n));
    gts.push_back(io::read_labelmap(o.gt / n));
  }
  const auto report = metrics::semantic_eval(preds, gts, o.classes);
  emit_report(metrics::to_json(report), o.out, out);
  return kExitOk;
}

struct EvalInstanceOptions {
  fs::path dets;
  fs::path gt;
  std::string iou = "0.5,0.75";
  std::optional<fs::path> out;
};

int cmd_eval_instance(const EvalInstanceOptions& o, std::ostream& out) {
  const auto thresholds = parse_double_list(o.iou, "--iou");
  const auto dets = io::read_detections(o.dets);
  const auto gts = io::read_gt_instances(o.gt);
  const auto report = metrics::instance_eval(dets, gts, thresholds);
  emit_report(metrics::to_json(report), o.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- render

struct RenderOptions {
  fs::path labels;
  fs::path manifest;
  fs::path out;
  double alpha = 0.6;
  std::optional<int> threads;
};

int cmd_render(const RenderOptions& o, std::ostream& out) {
  if (!(o.alpha >= 0.0 && o.alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
  const int threads = resolve_threads(o.threads);
  const auto manifest = io::read_manifest(o.manifest);
  fs::create_directories(o.out);
  const auto& palette = io::pascal_palette();
  parallel_for(manifest.entries.size(), threads, [&](std::size_t k) {
    const auto& entry = manifest.entries[k];
    Image image = io::read_image(entry.image_path);
    const LabelMap labels = io::read_labelmap(o.labels / (entry.stem + ".png"));
    if (labels.dims() != image.dims()) throw Error(ErrorCode::DimensionMismatch, entry.stem + ": labels and image differ in size");
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const std::uint8_t l = labels.at(x, y);
        if (l == kBackground) continue;
        Rgb& px = image.at(x, y);
        const Rgb& c = palette[l];
        auto mix = [&](std::uint8_t a, std::uint8_t b) {
          return static_cast<std::uint8_t>(std::lround((1.0 - o.alpha) * a + o.alpha * b));
        };
        px = {mix(px.r, c.r), mix(px.g, c.g), mix(px.b, c.b)};
      }
    }
    io::write_image(image, o.out / (entry.stem + ".png"));
  });
  out << "rendered " << manifest.entries.size() << " overlays to " << o.out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::optional<fs::path> spec;
  fs::path out;
  std::size_t count = 10;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  synth::SceneSpec spec = o.spec ? synth::read_scene_spec(*o.spec) : synth::SceneSpec{};
  if (o.seed) spec.seed = *o.seed;
  synth::write_corpus(spec, o.count, o.out);
  out << "wrote " << o.count << " scenes to " << o.out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- rounds

struct RoundsOptions {
  fs::path manifest;
  fs::path out;
  int rounds = 3;
  std::string init = "box";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string stages = "1,2,3";
  std::optional<int> threads;
  int classes = kDefaultNumClasses;
  crf::Params crf;
};

int cmd_rounds(const RoundsOptions& o, std::ostream& out) {
  const auto stages = parse_stages(o.stages);
  const int threads = resolve_threads(o.threads);
  const auto init = pipeline::parse_method(o.init);
  if (init != pipeline::Method::Box && init != pipeline::Method::BoxInner) {
    throw UsageError("--init must be box or boxi");
  }
  WeakLabelConfig cfg;
  cfg.rng_seed = o.seed;
  cfg.n_classes = o.classes;
  cfg.validate();

  const auto manifest = io::read_manifest(o.manifest);
  std::vector<denoise::HarnessImage> dataset;
  std::vector<LabelMap> gts;
  for (const auto& entry : manifest.entries) {
    if (!entry.gt_label_path) throw Error(ErrorCode::MissingMask, entry.stem + ": the rounds command needs gt_label_path");
    io::Sample s = io::load_sample(entry, cfg.n_classes);
    pipeline::Inputs in{&s.image, &s.boxes, nullptr, nullptr};
    LabelMap initial = pipeline::generate_labels(init, in, cfg);
    LabelMap gt = io::read_labelmap(*entry.gt_label_path);
    if (gt.dims() != s.image.dims()) throw Error(ErrorCode::DimensionMismatch, entry.stem + ": ground truth size differs");
    gts.push_back(gt);
    dataset.push_back({entry.stem, std::move(s.image), std::move(s.boxes), std::move(initial), std::move(gt)});
  }
  denoise::SyntheticPredictor predictor(std::move(gts), o.noise, o.seed, cfg.n_classes);
  const auto states = denoise::recursive_harness(dataset, predictor, o.rounds, cfg, o.crf, stages, threads);
  fs::create_directories(o.out);
  ojson trajectory = ojson::array();
  for (const auto& st : states) {
    denoise::write_round(o.out, st, dataset);
    trajectory.push_back(ojson{{"round", st.round_index},
                               {"miou", st.stats.miou ? ojson(*st.stats.miou) : ojson(nullptr)},
                               {"changed_pixel_fraction", st.stats.changed_pixel_fraction}});
  }
  ojson settings{{"init", o.init},     {"rounds", o.rounds},       {"noise", o.noise},
                 {"stages", o.stages}, {"config", config_json(cfg)}, {"crf", crf_json(o.crf)}};
  write_metadata(o.out, "rounds", std::move(settings), o.manifest, manifest, cfg.rng_seed);
  out << ojson{{"trajectory", trajectory}}.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- instances

struct InstancesOptions {
  std::string method;
  fs::path manifest;
  fs::path out;
  bool boundaries = false;
  bool proposals = false;
  std::uint64_t seed = 0;
  int classes = kDefaultNumClasses;
};

int cmd_instances(const InstancesOptions& o, std::ostream& out) {
  const auto method = pipeline::parse_instance_method(o.method);
  if (method == pipeline::InstanceMethod::BestProposal && !o.proposals) {
    throw Error(ErrorCode::InvalidArgument, "method proposal requires --proposals");
  }
  WeakLabelConfig cfg;
  cfg.rng_seed = o.seed;
  cfg.n_classes = o.classes;
  const auto manifest = io::read_manifest(o.manifest);
  io::DetectionSet dets;
  for (const auto& entry : manifest.entries) {
    const io::Sample s = io::load_sample(entry, cfg.n_classes);
    std::optional<BoundaryMap> boundary;
    if (method == pipeline::InstanceMethod::GrabCutPlus) {
      boundary = o.boundaries && entry.boundary_path ? io::read_boundary_map(*entry.boundary_path)
                                                     : io::sobel_boundary(s.image);
    }
    std::optional<io::ProposalSet> props;
    if (method == pipeline::InstanceMethod::BestProposal) {
      props = entry.proposal_dir ? io::read_proposals(*entry.proposal_dir, s.image.dims()) : io::ProposalSet{};
    }
    WeakLabelConfig image_cfg = cfg;
    image_cfg.rng_seed = image_seed(cfg.rng_seed, entry.stem);
    pipeline::Inputs in{&s.image, &s.boxes, boundary ? &*boundary : nullptr, props ? &*props : nullptr};
    auto masks = pipeline::instance_masks(method, in, image_cfg);
    for (std::size_t k = 0; k < masks.size(); ++k)
      dets.push_back({entry.stem, s.boxes[k].class_id, 1.0, s.boxes[k], std::move(masks[k])});
  }
  if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
  io::write_detections(o.out, dets);
  out << "wrote " << dets.size() << " instance masks to " << o.out.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation labels from bounding boxes"};
  app.name("boxlabel");
  app.require_subcommand(1);
  app.set_version_flag("--version", BOXLABEL_VERSION);

  const std::vector<std::string> methods{"box", "boxi", "grabcut", "grabcut+", "grabcut+i", "mcg", "mg+"};

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate training labels from box annotations");
  g->add_option("--method", gen.method, "Label generator")->required()->check(CLI::IsMember(methods));
  g->add_option("--manifest", gen.manifest, "Dataset manifest JSON")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--boundaries", gen.boundaries, "Use the manifest's boundary maps");
  g->add_flag("--proposals", gen.proposals, "Use the manifest's object proposals");
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--runs", gen.runs, "Perturbed GrabCut+ runs per box (grabcut+i)")->capture_default_str();
  g->add_option("--threads", gen.threads, "Worker threads (default: BOXLABEL_THREADS or 1)");
  g->add_option("--classes", gen.classes, "Number of object classes")->capture_default_str();
  g->add_option("--lambda", gen.grabcut.lambda, "GrabCut pairwise strength")->capture_default_str();
  g->add_option("--gamma", gen.grabcut.gamma_boundary, "Boundary pairwise sharpness")->capture_default_str();

  DenoiseOptions dn;
  auto* d = app.add_subcommand("denoise", "Apply the post-processing stages to predictions");
  d->add_option("--pred", dn.pred, "Directory of predicted label maps")->required();
  d->add_option("--initial", dn.initial, "Directory of initial label maps")->required();
  d->add_option("--manifest", dn.manifest, "Dataset manifest JSON")->required();
  d->add_option("--out", dn.out, "Output directory")->required();
  d->add_option("--stages", dn.stages, "Comma list of stages (1 box enforcing, 2 outlier reset, 3 CRF)")
      ->capture_default_str();
  d->add_option("--iou-thresh", dn.iou_thresh, "Outlier reset IoU threshold")->capture_default_str();
  d->add_option("--threads", dn.threads, "Worker threads (default: BOXLABEL_THREADS or 1)");
  d->add_option("--classes", dn.classes, "Number of object classes")->capture_default_str();
  add_crf_options(d, dn.crf);

  auto* e = app.add_subcommand("eval", "Evaluate labels");
  e->require_subcommand(1);
  EvalSemanticOptions es;
  auto* esc = e->add_subcommand("semantic", "Per-class IoU and mIoU");
  esc->add_option("--pred", es.pred, "Directory of predicted label maps")->required();
  esc->add_option("--gt", es.gt, "Directory of ground-truth label maps")->required();
  esc->add_option("--classes", es.classes, "Number of classes including background")->capture_default_str();
  esc->add_option("--out", es.out, "Also write the report here");
  EvalInstanceOptions ei;
  auto* eic = e->add_subcommand("instance", "Mask AP and average best overlap");
  eic->add_option("--dets", ei.dets, "Detection JSON with masks")->required();
  eic->add_option("--gt", ei.gt, "Ground-truth instance JSON")->required();
  eic->add_option("--iou", ei.iou, "Comma list of IoU thresholds")->capture_default_str();
  eic->add_option("--out", ei.out, "Also write the report here");

  RenderOptions rd;
  auto* r = app.add_subcommand("render", "Overlay label maps on their images");
  r->add_option("--labels", rd.labels, "Directory of label maps")->required();
  r->add_option("--manifest", rd.manifest, "Dataset manifest JSON (for the images)")->required();
  r->add_option("--out", rd.out, "Output directory")->required();
  r->add_option("--alpha", rd.alpha, "Overlay opacity")->capture_default_str();
  r->add_option("--threads", rd.threads, "Worker threads (default: BOXLABEL_THREADS or 1)");

  SynthOptions sy;
  auto* s = app.add_subcommand("synth", "Write a synthetic corpus");
  s->add_option("--spec", sy.spec, "Scene spec JSON");
  s->add_option("--out", sy.out, "Output directory")->required();
  s->add_option("--count", sy.count, "Number of scenes")->capture_default_str();
  s->add_option("--seed", sy.seed, "Override the spec seed");

  RoundsOptions ro;
  auto* rr = app.add_subcommand("rounds", "Recursive de-noising with a synthetic predictor");
  rr->add_option("--manifest", ro.manifest, "Dataset manifest JSON with ground truth")->required();
  rr->add_option("--out", ro.out, "Output directory")->required();
  rr->add_option("--rounds", ro.rounds, "Number of rounds")->capture_default_str();
  rr->add_option("--init", ro.init, "Initial labels (box or boxi)")->capture_default_str();
  rr->add_option("--noise", ro.noise, "Predictor corruption level in [0, 1]")->capture_default_str();
  rr->add_option("--seed", ro.seed, "Random seed")->capture_default_str();
  rr->add_option("--stages", ro.stages, "Comma list of stages")->capture_default_str();
  rr->add_option("--threads", ro.threads, "Worker threads (default: BOXLABEL_THREADS or 1)");
  rr->add_option("--classes", ro.classes, "Number of object classes")->capture_default_str();
  add_crf_options(rr, ro.crf);

  InstancesOptions in;
  auto* ins = app.add_subcommand("instances", "Training-free instance masks for every box");
  ins->add_option("--method", in.method, "Instance baseline")
      ->required()
      ->check(CLI::IsMember({"rectangle", "ellipse", "grabcut", "grabcut+", "proposal"}));
  ins->add_option("--manifest", in.manifest, "Dataset manifest JSON")->required();
  ins->add_option("--out", in.out, "Output detection JSON")->required();
  ins->add_flag("--boundaries", in.boundaries, "Use the manifest's boundary maps");
  ins->add_flag("--proposals", in.proposals, "Use the manifest's object proposals");
  ins->add_option("--seed", in.seed, "Random seed")->capture_default_str();
  ins->add_option("--classes", in.classes, "Number of object classes")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << BOXLABEL_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "ERROR:" << kExitUsage << ":" << ex.what() << '\n';
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (d->parsed()) return cmd_denoise(dn, out);
    if (esc->parsed()) return cmd_eval_semantic(es, out);
    if (eic->parsed()) return cmd_eval_instance(ei, out);
    if (r->parsed()) return cmd_render(rd, out);
    if (s->parsed()) return cmd_synth(sy, out);
    if (rr->parsed()) return cmd_rounds(ro, out);
    if (ins->parsed()) return cmd_instances(in, out);
  } catch (const UsageError& ex) {
    err << "ERROR:" << kExitUsage << ":" << ex.what() << '\n';
    return kExitUsage;
  } catch (const Error& ex) {
    err << "ERROR:" << kExitData << ":" << ex.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& ex) {
    err << "ERROR:" << kExitData << ":" << ex.what() << '\n';
    return kExitData;
  } catch (const std::exception& ex) {
    err << "ERROR:" << kExitInternal << ":" << ex.what() << '\n';
    return kExitInternal;
  }
  err << "ERROR:" << kExitUsage << ":no command given\n";
  return kExitUsage;
}

}  // namespace boxlabel::cli
