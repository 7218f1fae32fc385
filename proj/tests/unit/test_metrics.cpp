#include <doctest.h>

#include <algorithm>
#include <map>

#include "boxlabel/metrics.hpp"
#include "boxlabel/rng.hpp"
#include "reference_ap.hpp"

using namespace boxlabel;
using namespace boxlabel::metrics;

namespace {

const Dims kDims{10, 10};

SegmentMask cols(int x0, int x1) { return box_mask(Box{1, x0, 0, x1, 10}, kDims); }

}  // namespace

TEST_CASE("mask IoU") {
  CHECK(mask_iou(cols(0, 6), cols(0, 10)) == doctest::Approx(0.6));
  CHECK(mask_iou(cols(0, 5), cols(5, 10)) == 0.0);
  CHECK_THROWS_AS(mask_iou(SegmentMask(kDims, 0), SegmentMask(kDims, 0)), Error);
  CHECK_THROWS_AS(mask_iou(cols(0, 2), SegmentMask(Dims{3, 3}, 1)), Error);
}

TEST_CASE("semantic toy gives 7/12") {
  const LabelMap gt(Dims{2, 2}, std::vector<std::uint8_t>{0, 0, 1, 1});
  const LabelMap pred(Dims{2, 2}, std::vector<std::uint8_t>{0, 1, 1, 1});
  const auto r = semantic_eval(std::vector<LabelMap>{pred}, std::vector<LabelMap>{gt}, 2);
  CHECK(r.miou == 7.0 / 12.0);
  CHECK(r.confusion[0][1] == 1);
  const auto same = semantic_eval(std::vector<LabelMap>{gt}, std::vector<LabelMap>{gt}, 21);
  CHECK(same.miou == 1.0);
  CHECK_FALSE(same.per_class_iou[5].has_value());
}

TEST_CASE("semantic eval ignores void and validates input") {
  const LabelMap gt(Dims{2, 1}, std::vector<std::uint8_t>{1, kIgnore});
  const LabelMap pred(Dims{2, 1}, std::vector<std::uint8_t>{1, 0});
  CHECK(semantic_eval(std::vector<LabelMap>{pred}, std::vector<LabelMap>{gt}, 2).miou == 1.0);
  const LabelMap bad(Dims{2, 1}, std::vector<std::uint8_t>{3, 0});
  CHECK_THROWS_AS(semantic_eval(std::vector<LabelMap>{bad}, std::vector<LabelMap>{gt}, 2), Error);
  CHECK_THROWS_AS(semantic_eval(std::vector<LabelMap>{}, std::vector<LabelMap>{}, 2), Error);
  CHECK_THROWS_AS(semantic_eval(std::vector<LabelMap>{pred}, std::vector<LabelMap>{}, 2), Error);
  const LabelMap voids(Dims{2, 1}, kIgnore);
  CHECK_THROWS_AS(semantic_eval(std::vector<LabelMap>{voids}, std::vector<LabelMap>{voids}, 2), Error);
}

TEST_CASE("instance AP hand case") {
  std::vector<io::GtInstance> gts{{"a", 1, cols(0, 10)}, {"a", 1, cols(5, 10)}};
  std::vector<io::Detection> dets{{"a", 1, 0.9, {}, cols(0, 6)}, {"a", 1, 0.8, {}, cols(0, 1)}, {"a", 1, 0.7, {}, cols(5, 9)}};
  const auto ap = instance_ap(dets, gts, 0.5);
  // det0 -> gt0 (IoU 0.6) TP, det1 FP, det2 -> gt1 (IoU 0.8) TP
  CHECK(ap.at(1) == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
  CHECK(ap.at(1) == doctest::Approx(testing::reference_ap(dets, gts, 1, 0.5)));
  CHECK(instance_ap(dets, gts, 0.9).at(1) == doctest::Approx(0.0));
  dets[0].mask.reset();
  CHECK_THROWS_AS(instance_ap(dets, gts, 0.5), Error);
}

TEST_CASE("instance AP agrees with the reference on random cases") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<io::GtInstance> gts;
    std::vector<io::Detection> dets;
    for (int i = 0; i < 1 + static_cast<int>(rng.below(4)); ++i) {
      const int x0 = static_cast<int>(rng.below(8));
      gts.push_back({rng.below(2) ? "a" : "b", 1 + static_cast<int>(rng.below(2)), cols(x0, x0 + 1 + static_cast<int>(rng.below(10 - x0)))});
    }
    for (int i = 0; i < static_cast<int>(rng.below(6)); ++i) {
      const int x0 = static_cast<int>(rng.below(8));
      dets.push_back({rng.below(2) ? "a" : "b", 1 + static_cast<int>(rng.below(2)), std::round(rng.uniform() * 4) / 4, {},
                      cols(x0, x0 + 1 + static_cast<int>(rng.below(10 - x0)))});
    }
    for (double t : {0.5, 0.75}) {
      const auto ap = instance_ap(dets, gts, t);
      for (const auto& [cls, value] : ap) CHECK(value == doctest::Approx(testing::reference_ap(dets, gts, cls, t)));
    }
  }
}

TEST_CASE("ABO arithmetic") {
  std::vector<io::GtInstance> gts{{"a", 1, cols(0, 10)}, {"a", 1, cols(5, 10)}, {"a", 2, cols(0, 10)}};
  std::vector<io::Detection> dets{{"a", 1, 0.5, {}, cols(0, 6)}, {"a", 1, 0.5, {}, cols(5, 9)}, {"b", 2, 0.5, {}, cols(0, 10)}};
  // class 1: gt0 best 0.6, gt1 best 0.8 -> 0.7; class 2: no same-image detection -> 0
  CHECK(abo(dets, gts) == doctest::Approx((0.7 + 0.0) / 2.0));
  CHECK_THROWS_AS(abo(dets, std::vector<io::GtInstance>{}), Error);
}

TEST_CASE("perfect predictions score 1 everywhere") {
  std::vector<io::GtInstance> gts{{"a", 1, cols(0, 3)}, {"b", 2, cols(4, 9)}};
  std::vector<io::Detection> dets{{"a", 1, 1.0, {}, cols(0, 3)}, {"b", 2, 1.0, {}, cols(4, 9)}};
  const auto rep = instance_eval(dets, gts, {0.5, 0.75});
  CHECK(rep.map_at.at(0.5) == 1.0);
  CHECK(rep.map_at.at(0.75) == 1.0);
  CHECK(rep.abo == 1.0);
  const std::string js = to_json(rep);
  CHECK(js.find("\"ABO\"") != std::string::npos);
  CHECK(js.find("mAP@0.5") != std::string::npos);
}
