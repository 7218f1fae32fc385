#include <doctest.h>

#include <cmath>

#include "boxlabel/synthcorpus.hpp"
#include "boxlabel/weaklabels.hpp"

using namespace boxlabel;
using namespace boxlabel::weak;

TEST_CASE("box labels paint smaller boxes on top") {
  const BoxSet boxes = order_boxes({Box{2, 2, 2, 4, 4}, Box{1, 0, 0, 6, 6}}, Dims{8, 8});
  const LabelMap m = rasterize_box_labels(boxes);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(3, 3) == 2);
  CHECK(m.at(7, 7) == 0);
}

TEST_CASE("inner box keeps about 20 percent of the area") {
  for (int w = 20; w <= 120; w += 7) {
    for (int h = 20; h <= 120; h += 11) {
      const Box b{1, 3, 5, 3 + w, 5 + h};
      const Box in = inner_box(b, 0.2);
      const double frac = double(in.area()) / double(b.area());
      CHECK(frac >= 0.19);
      CHECK(frac <= 0.21);
      CHECK(in.xmin >= b.xmin);
      CHECK(in.xmax <= b.xmax);
      // centred to within a pixel
      CHECK(std::abs((in.xmin - b.xmin) - (b.xmax - in.xmax)) <= 1);
      CHECK(std::abs((in.ymin - b.ymin) - (b.ymax - in.ymax)) <= 1);
    }
  }
  CHECK(inner_box(Box{1, 0, 0, 1, 1}, 0.2).area() == 1);
}

TEST_CASE("box^i marks the ring as ignore") {
  const BoxSet boxes = order_boxes({Box{4, 0, 0, 20, 20}}, Dims{30, 30});
  const LabelMap m = rasterize_box_inner(boxes, 0.2);
  CHECK(m.at(10, 10) == 4);
  CHECK(m.at(1, 1) == kIgnore);
  CHECK(m.at(25, 25) == 0);
}

TEST_CASE("vote classification thresholds") {
  const WeakLabelConfig cfg;
  CHECK(classify_vote(0.70, cfg) == SegState::Foreground);
  CHECK(classify_vote(0.699, cfg) == SegState::Ignore);
  CHECK(classify_vote(0.20, cfg) == SegState::Ignore);
  CHECK(classify_vote(0.199, cfg) == SegState::Background);
  CHECK(classify_votes(700, 1000, cfg) == SegState::Foreground);
  CHECK(classify_votes(699, 1000, cfg) == SegState::Ignore);
  CHECK(classify_votes(200, 1000, cfg) == SegState::Ignore);
  CHECK(classify_votes(199, 1000, cfg) == SegState::Background);
  CHECK(classify_votes(105, 150, cfg) == SegState::Foreground);
  CHECK_THROWS_AS(classify_votes(1, 0, cfg), Error);
}

TEST_CASE("perturbations stay in range and are reproducible") {
  WeakLabelConfig cfg;
  const Box box{1, 10, 10, 50, 40};
  const Dims dims{60, 60};
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto p = perturbation(box, dims, cfg, 3, k);
    CHECK(p.margin >= cfg.margin_min);
    CHECK(p.margin <= cfg.margin_max);
    CHECK(std::abs(p.box.xmin - box.xmin) <= 2);
    CHECK(std::abs(p.box.ymax - box.ymax) <= 2);
    CHECK(p.box.area() > 0);
    const auto q = perturbation(box, dims, cfg, 3, k);
    CHECK(q.box == p.box);
    CHECK(q.seed == p.seed);
  }
  CHECK(perturbation(box, dims, cfg, 3, 0).seed != perturbation(box, dims, cfg, 4, 0).seed);
}

TEST_CASE("GrabCut+^i votes over the original box") {
  synth::SceneSpec spec;
  spec.canvas = {48, 48};
  spec.n_objects = 1;
  spec.seed = 5;
  const auto scene = synth::generate(spec);
  WeakLabelConfig cfg;
  cfg.n_perturbations = 8;
  VoteCounts votes;
  const Box box = scene.boxes[0];
  const TriSegment seg = grabcut_plus_i(scene.image, box, cfg, grabcut::Params::grabcut_plus(), &scene.boundary, 0, &votes);
  CHECK(votes.runs == 8);
  CHECK(votes.fg.size() == static_cast<std::size_t>(box.area()));
  for (int y = box.ymin; y < box.ymax; ++y) {
    for (int x = box.xmin; x < box.xmax; ++x) {
      const int v = votes.fg[static_cast<std::size_t>(y - box.ymin) * box.width() + (x - box.xmin)];
      CHECK(seg.at_image(x, y) == classify_votes(v, 8, cfg));
    }
  }
}

TEST_CASE("best proposal and intersection") {
  const Dims dims{20, 20};
  const Box box{1, 5, 5, 15, 15};
  std::vector<SegmentMask> props{box_mask(Box{1, 0, 0, 4, 4}, dims), box_mask(Box{1, 6, 6, 14, 14}, dims),
                                 box_mask(Box{1, 6, 6, 14, 14}, dims)};
  CHECK(pick_best_proposal(box, props) == std::optional<std::size_t>(1));
  CHECK_FALSE(pick_best_proposal(box, std::span<const SegmentMask>(props.data(), 1)).has_value());
  CHECK_FALSE(pick_best_proposal(box, {}).has_value());

  const SegmentMask gc = box_mask(Box{1, 5, 5, 10, 15}, dims);
  const TriSegment seg = intersect_mg(&props[1], gc, box);
  CHECK(seg.at_image(7, 7) == SegState::Foreground);
  CHECK(seg.at_image(12, 7) == SegState::Ignore);
  CHECK(seg.at_image(5, 5) == SegState::Ignore);
  const TriSegment none = intersect_mg(nullptr, gc, box);
  CHECK(none.at_image(7, 7) == SegState::Foreground);
  CHECK(none.at_image(12, 7) == SegState::Background);
}

TEST_CASE("compose paints back to front and checks counts") {
  const BoxSet boxes = order_boxes({Box{1, 0, 0, 10, 10}, Box{2, 4, 4, 8, 8}}, Dims{12, 12});
  std::vector<TriSegment> segs{TriSegment(boxes[0], SegState::Foreground), TriSegment(boxes[1], SegState::Background)};
  segs[1].at_image(5, 5) = SegState::Foreground;
  segs[1].at_image(6, 6) = SegState::Ignore;
  const LabelMap m = compose_labelmap(segs, boxes);
  CHECK(m.at(4, 4) == 1);
  CHECK(m.at(5, 5) == 2);
  CHECK(m.at(6, 6) == kIgnore);
  CHECK(m.at(11, 11) == 0);
  CHECK_THROWS_AS(compose_labelmap(std::span<const TriSegment>(segs.data(), 1), boxes), Error);
}

TEST_CASE("instance baselines") {
  const Dims dims{30, 30};
  const Box box{1, 5, 5, 25, 15};
  CHECK(instance_baseline(box, InstanceShape::Rectangle, dims) == box_mask(box, dims));
  const SegmentMask e = instance_baseline(box, InstanceShape::Ellipse, dims);
  const double area = static_cast<double>(count_foreground(e));
  CHECK(area == doctest::Approx(3.14159265 * 10 * 5).epsilon(0.1));
  CHECK(e.at(15, 10) == 1);
  CHECK(e.at(5, 5) == 0);
}
