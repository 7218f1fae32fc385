#include <doctest.h>

#include "boxlabel/metrics.hpp"
#include "boxlabel/pipeline.hpp"
#include "boxlabel/synthcorpus.hpp"
#include "boxlabel/weaklabels.hpp"

using namespace boxlabel;
using namespace boxlabel::pipeline;

TEST_CASE("method names round trip") {
  for (const char* name : {"box", "boxi", "grabcut", "grabcut+", "grabcut+i", "mcg", "mg+"})
    CHECK(method_name(parse_method(name)) == name);
  CHECK_THROWS_AS(parse_method("sam"), Error);
  CHECK(needs_boundaries(Method::GrabCutPlus));
  CHECK_FALSE(needs_boundaries(Method::GrabCut));
  CHECK(needs_proposals(Method::MgPlus));
  CHECK_FALSE(needs_proposals(Method::Box));
}

TEST_CASE("every method produces a valid label map") {
  synth::SceneSpec spec;
  spec.canvas = {48, 48};
  spec.seed = 8;
  const auto scene = synth::generate(spec);
  const io::ProposalSet props(scene.proposals.begin(), scene.proposals.end());
  const Inputs in{&scene.image, &scene.boxes, &scene.boundary, &props};
  WeakLabelConfig cfg;
  cfg.n_perturbations = 6;
  const LabelMap outside = weak::rasterize_box_labels(scene.boxes);
  for (const char* name : {"box", "boxi", "grabcut", "grabcut+", "grabcut+i", "mcg", "mg+"}) {
    const LabelMap m = generate_labels(parse_method(name), in, cfg);
    CHECK(m.dims() == spec.canvas);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (outside[i] == 0) CHECK(m[i] == 0);
    CHECK(generate_labels(parse_method(name), in, cfg) == m);
  }
  CHECK(generate_labels(Method::Box, in, cfg) == outside);
  const auto rep = metrics::semantic_eval(std::vector<LabelMap>{generate_labels(Method::MgPlus, in, cfg)},
                                          std::vector<LabelMap>{scene.labels}, 21);
  CHECK(rep.miou > 0.9);
}

TEST_CASE("missing inputs are errors") {
  synth::SceneSpec spec;
  spec.canvas = {32, 32};
  const auto scene = synth::generate(spec);
  const Inputs bare{&scene.image, &scene.boxes, nullptr, nullptr};
  CHECK_THROWS_AS(generate_labels(Method::GrabCutPlus, bare, {}), Error);
  CHECK_THROWS_AS(generate_labels(Method::MgPlus, bare, {}), Error);
  CHECK_NOTHROW(generate_labels(Method::GrabCut, bare, {}));
}

TEST_CASE("instance baselines give one mask per box") {
  synth::SceneSpec spec;
  spec.canvas = {40, 40};
  const auto scene = synth::generate(spec);
  const io::ProposalSet props(scene.proposals.begin(), scene.proposals.end());
  const Inputs in{&scene.image, &scene.boxes, &scene.boundary, &props};
  for (const char* name : {"rectangle", "ellipse", "grabcut", "grabcut+", "proposal"}) {
    const auto masks = instance_masks(parse_instance_method(name), in, {});
    CHECK(masks.size() == scene.boxes.size());
  }
}
