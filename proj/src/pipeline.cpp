#include "boxlabel/pipeline.hpp"

#include "boxlabel/weaklabels.hpp"

namespace boxlabel::pipeline {
namespace {

grabcut::Params grabcut_params(const grabcut::Params& base, bool plus, const WeakLabelConfig& cfg) {
  grabcut::Params p = base;
  p.pairwise_source = plus ? grabcut::PairwiseSource::BoundaryMap : grabcut::PairwiseSource::RgbContrast;
  p.margin = cfg.margin_default;
  return p;
}

const io::ProposalSet& require_proposals(const Inputs& in) {
  if (in.proposals == nullptr) throw Error(ErrorCode::InvalidArgument, "method needs object proposals");
  return *in.proposals;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "box") return Method::Box;
  if (name == "boxi") return Method::BoxInner;
  if (name == "grabcut") return Method::GrabCut;
  if (name == "grabcut+") return Method::GrabCutPlus;
  if (name == "grabcut+i") return Method::GrabCutPlusI;
  if (name == "mcg") return Method::Mcg;
  if (name == "mg+") return Method::MgPlus;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Box: return "box";
    case Method::BoxInner: return "boxi";
    case Method::GrabCut: return "grabcut";
    case Method::GrabCutPlus: return "grabcut+";
    case Method::GrabCutPlusI: return "grabcut+i";
    case Method::Mcg: return "mcg";
    case Method::MgPlus: return "mg+";
  }
  return "?";
}

bool needs_boundaries(Method m) {
  return m == Method::GrabCutPlus || m == Method::GrabCutPlusI || m == Method::MgPlus;
}

bool needs_proposals(Method m) { return m == Method::Mcg || m == Method::MgPlus; }

LabelMap generate_labels(Method method, const Inputs& in, const WeakLabelConfig& cfg, const grabcut::Params& base) {
  if (in.image == nullptr || in.boxes == nullptr) throw Error(ErrorCode::InvalidArgument, "image and boxes are required");
  cfg.validate();
  const Image& image = *in.image;
  const BoxSet& boxes = *in.boxes;
  if (boxes.image_dims() != image.dims()) throw Error(ErrorCode::DimensionMismatch, "boxes and image differ in size");
  if (in.boundary != nullptr && in.boundary->dims() != image.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "boundary map and image differ in size");
  }

  switch (method) {
    case Method::Box: return weak::rasterize_box_labels(boxes);
    case Method::BoxInner: return weak::rasterize_box_inner(boxes, cfg.inner_region_frac);
    default: break;
  }

  std::vector<weak::TriSegment> segs;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const Box& b = boxes[k];
    switch (method) {
      case Method::GrabCut:
      case Method::GrabCutPlus: {
        const bool plus = method == Method::GrabCutPlus;
        const SegmentMask m =
            grabcut::run_grabcut(image, b, cfg, grabcut_params(base, plus, cfg), plus ? in.boundary : nullptr, k);
        segs.push_back(weak::segment_from_mask(m, b));
        break;
      }
      case Method::GrabCutPlusI:
        segs.push_back(weak::grabcut_plus_i(image, b, cfg, grabcut_params(base, true, cfg), in.boundary, k));
        break;
      case Method::Mcg: {
        const auto& props = require_proposals(in);
        const auto best = weak::pick_best_proposal(b, props);
        segs.push_back(best ? weak::segment_from_mask(props[*best], b) : weak::TriSegment(b, weak::SegState::Foreground));
        break;
      }
      case Method::MgPlus: {
        const auto& props = require_proposals(in);
        const auto best = weak::pick_best_proposal(b, props);
        const SegmentMask g = grabcut::run_grabcut(image, b, cfg, grabcut_params(base, true, cfg), in.boundary, k);
        segs.push_back(weak::intersect_mg(best ? &props[*best] : nullptr, g, b));
        break;
      }
      default: break;
    }
  }
  return weak::compose_labelmap(segs, boxes);
}

InstanceMethod parse_instance_method(const std::string& name) {
  if (name == "rectangle") return InstanceMethod::Rectangle;
  if (name == "ellipse") return InstanceMethod::Ellipse;
  if (name == "grabcut") return InstanceMethod::GrabCut;
  if (name == "grabcut+") return InstanceMethod::GrabCutPlus;
  if (name == "proposal") return InstanceMethod::BestProposal;
  throw Error(ErrorCode::InvalidArgument, "unknown instance method '" + name + "'");
}

std::vector<SegmentMask> instance_masks(InstanceMethod method, const Inputs& in, const WeakLabelConfig& cfg,
                                        const grabcut::Params& base) {
  if (in.image == nullptr || in.boxes == nullptr) throw Error(ErrorCode::InvalidArgument, "image and boxes are required");
  const Image& image = *in.image;
  std::vector<SegmentMask> out;
  for (std::size_t k = 0; k < in.boxes->size(); ++k) {
    const Box& b = (*in.boxes)[k];
    switch (method) {
      case InstanceMethod::Rectangle:
        out.push_back(weak::instance_baseline(b, weak::InstanceShape::Rectangle, image.dims()));
        break;
      case InstanceMethod::Ellipse:
        out.push_back(weak::instance_baseline(b, weak::InstanceShape::Ellipse, image.dims()));
        break;
      case InstanceMethod::GrabCut:
      case InstanceMethod::GrabCutPlus: {
        const bool plus = method == InstanceMethod::GrabCutPlus;
        out.push_back(grabcut::run_grabcut(image, b, cfg, grabcut_params(base, plus, cfg), plus ? in.boundary : nullptr, k));
        break;
      }
      case InstanceMethod::BestProposal: {
        const auto& props = require_proposals(in);
        const auto best = weak::pick_best_proposal(b, props);
        out.push_back(best ? props[*best] : weak::instance_baseline(b, weak::InstanceShape::Rectangle, image.dims()));
        break;
      }
    }
  }
  return out;
}

}  // namespace boxlabel::pipeline
