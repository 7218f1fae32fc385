#pragma once

#include <string>

#include "boxlabel/core.hpp"
#include "boxlabel/dataio.hpp"
#include "boxlabel/grabcut.hpp"

namespace boxlabel::pipeline {

enum class Method { Box, BoxInner, GrabCut, GrabCutPlus, GrabCutPlusI, Mcg, MgPlus };

/// CLI spelling: box, boxi, grabcut, grabcut+, grabcut+i, mcg, mg+.
Method parse_method(const std::string& name);
std::string method_name(Method m);
bool needs_boundaries(Method m);
bool needs_proposals(Method m);

struct Inputs {
  const Image* image = nullptr;
  const BoxSet* boxes = nullptr;
  const BoundaryMap* boundary = nullptr;   // GrabCut+ family
  const io::ProposalSet* proposals = nullptr;  // mcg, mg+
};

/// Label map for one image. GrabCut-based methods use cfg.margin_default as
/// context and box painting order as the per-box seed index. Throws
/// MissingBoundaryMap / InvalidArgument when a required input is absent.
LabelMap generate_labels(Method method, const Inputs& in, const WeakLabelConfig& cfg,
                         const grabcut::Params& base = {});

/// Per-box foreground masks for the training-free instance baselines.
enum class InstanceMethod { Rectangle, Ellipse, GrabCut, GrabCutPlus, BestProposal };
InstanceMethod parse_instance_method(const std::string& name);
std::vector<SegmentMask> instance_masks(InstanceMethod method, const Inputs& in, const WeakLabelConfig& cfg,
                                        const grabcut::Params& base = {});

}  // namespace boxlabel::pipeline
