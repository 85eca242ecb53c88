#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracle/oracles.hpp"
#include "stvg/evaluation.hpp"

using stvg::aggregate_eval;
using stvg::BBox;
using stvg::Detection;
using stvg::GroundTruthAnnotation;
using stvg::SampleEval;
using stvg::shift_classify;
using stvg::shift_report;
using stvg::ShiftDirection;
using stvg::ShiftRecord;
using stvg::TemporalSpan;
using stvg::tiou_metric;
using stvg::TrimSide;
using stvg::Tubelet;
using stvg::upper_bound_detection;
using stvg::upper_bound_tubelet;
using stvg::viou_at_r;
using stvg::viou_metric;

namespace {

Tubelet boxed_tubelet(const std::string& id, int start, int end,
                      const std::map<int, BBox>& boxes) {
    Tubelet t{id, 1.0, {}};
    for (int f = start; f <= end; ++f) {
        Detection d;
        d.frame = f;
        d.box = boxes.count(f) ? boxes.at(f) : BBox{0, 0, 10, 10};
        d.confidence = 0.9;
        d.soft_labels = {"person"};
        t.detections.push_back(std::move(d));
    }
    return t;
}

GroundTruthAnnotation gt_constant(int start, int end, const BBox& box) {
    GroundTruthAnnotation gt;
    gt.video_id = "v";
    gt.span = {start, end, 1.0};
    for (int f = start; f <= end; ++f) {
        gt.boxes[f] = box;
    }
    return gt;
}

}  // namespace

TEST_CASE("tiou on identical, disjoint and offset spans") {
    CHECK(tiou_metric({0, 9, 1.0}, {0, 9, 1.0}) == 1.0);
    CHECK(tiou_metric({0, 4, 1.0}, {10, 14, 1.0}) == 0.0);
    const double expected = oracle::tiou_sets({5, 14, 1.0}, {0, 9, 1.0});
    CHECK(expected == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(tiou_metric({5, 14, 1.0}, {0, 9, 1.0}) == expected);
}

TEST_CASE("viou on perfect, offset and disjoint predictions") {
    const BBox box{100, 100, 200, 200};
    const GroundTruthAnnotation gt = gt_constant(0, 9, box);

    const Tubelet perfect = boxed_tubelet("p", 0, 9, {{0, box}});
    Tubelet all_match = perfect;
    for (auto& d : all_match.detections) d.box = box;
    CHECK(viou_metric(all_match, gt) == 1.0);

    // Perfect boxes on the 5-frame overlap of [5,14] vs [0,9]: 5/15.
    Tubelet offset = boxed_tubelet("o", 5, 14, {});
    for (auto& d : offset.detections) d.box = box;
    const double expected = oracle::viou_sets(oracle::tubelet_boxes(offset), offset.span(), gt);
    CHECK(expected == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(viou_metric(offset, gt) == expected);

    Tubelet disjoint = boxed_tubelet("d", 20, 29, {});
    CHECK(viou_metric(disjoint, gt) == 0.0);
}

TEST_CASE("viou counts missing predicted boxes as zero") {
    const BBox box{0, 0, 10, 10};
    const GroundTruthAnnotation gt = gt_constant(0, 4, box);
    Tubelet sparse{"s", 1.0, {}};
    for (int f : {0, 4}) {
        Detection d;
        d.frame = f;
        d.box = box;
        d.confidence = 0.9;
        d.soft_labels = {"person"};
        sparse.detections.push_back(std::move(d));
    }
    std::size_t missing = 0;
    CHECK(viou_metric(sparse, sparse.span(), gt, &missing) ==
          Catch::Approx(2.0 / 5.0).margin(1e-12));
    CHECK(missing == 3);
}

TEST_CASE("viou never exceeds tiou and both match the frame-set oracles") {
    std::mt19937_64 rng(61);
    const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int round = 0; round < 300; ++round) {
        const int gs = static_cast<int>(rng() % 30);
        const int ge = gs + static_cast<int>(rng() % 15);
        GroundTruthAnnotation gt;
        gt.video_id = "v";
        gt.span = {gs, ge, 1.0};
        for (int f = gs; f <= ge; ++f) {
            const double x = unit() * 50;
            const double y = unit() * 50;
            gt.boxes[f] = {x, y, x + 5 + unit() * 30, y + 5 + unit() * 30};
        }
        const int ps = static_cast<int>(rng() % 30);
        const int pe = ps + static_cast<int>(rng() % 15);
        Tubelet pred{"p", 1.0, {}};
        for (int f = ps; f <= pe; ++f) {
            Detection d;
            d.frame = f;
            const double x = unit() * 50;
            const double y = unit() * 50;
            d.box = {x, y, x + 5 + unit() * 30, y + 5 + unit() * 30};
            d.confidence = 0.9;
            d.soft_labels = {"person"};
            pred.detections.push_back(std::move(d));
        }
        const double tiou = tiou_metric(pred.span(), gt.span);
        const double viou = viou_metric(pred, gt);
        CHECK(viou <= tiou + 1e-12);
        CHECK(tiou == oracle::tiou_sets(pred.span(), gt.span));
        CHECK(viou == Catch::Approx(oracle::viou_sets(oracle::tubelet_boxes(pred), pred.span(),
                                                      gt))
                          .margin(1e-12));
    }
}

TEST_CASE("viou_at_r uses a strict inequality") {
    CHECK(viou_at_r({0.6, 0.4, 0.2}, 0.5) == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(viou_at_r({0.0, 0.0}, 0.3) == 0.0);
    CHECK(viou_at_r({0.5}, 0.5) == 0.0);
    CHECK_THROWS_AS(viou_at_r({}, 0.5), stvg::DataError);
    CHECK_THROWS_AS(viou_at_r({0.5}, 0.0), stvg::ConfigError);
}

TEST_CASE("aggregate ordering invariant holds on random samples") {
    std::mt19937_64 rng(67);
    for (int round = 0; round < 100; ++round) {
        std::vector<SampleEval> samples;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            const double tiou = static_cast<double>(rng() % 101) / 100.0;
            const double viou = tiou * static_cast<double>(rng() % 101) / 100.0;
            samples.push_back({"s" + std::to_string(i), tiou, viou});
        }
        const auto result = aggregate_eval(samples);
        CHECK(result.viou_at_05 <= result.viou_at_03);
        CHECK(result.viou_at_03 <= result.viou_at_01);
        CHECK(result.m_viou <= result.m_tiou + 1e-12);
    }
}

TEST_CASE("detection upper bound picks the best detection per frame") {
    const BBox box{0, 0, 10, 10};
    const GroundTruthAnnotation gt = gt_constant(0, 2, box);
    std::map<int, std::vector<Detection>> frames;
    Detection exact;
    exact.frame = 0;
    exact.box = box;
    exact.confidence = 0.9;
    exact.soft_labels = {"person"};
    frames[0] = {exact};
    Detection half = exact;
    half.frame = 1;
    half.box = {0, 0, 10, 5};  // IoU 0.5 against the target
    Detection poor = exact;
    poor.frame = 1;
    poor.box = {100, 100, 110, 110};
    frames[1] = {poor, half};
    // Frame 2 has no detections and contributes 0.
    CHECK(upper_bound_detection(gt, frames) == Catch::Approx(0.5).margin(1e-12));

    CHECK(upper_bound_detection(gt, {}) == 0.0);

    std::map<int, std::vector<Detection>> complete;
    for (int f = 0; f <= 2; ++f) {
        Detection d = exact;
        d.frame = f;
        complete[f] = {d};
    }
    CHECK(upper_bound_detection(gt, complete) == 1.0);
}

TEST_CASE("tubelet upper bound evaluates every proposal and dominates selections") {
    const BBox box{0, 0, 10, 10};
    const GroundTruthAnnotation gt = gt_constant(2, 9, box);

    Tubelet exact = boxed_tubelet("exact", 2, 9, {});
    for (auto& d : exact.detections) d.box = box;
    Tubelet rough = boxed_tubelet("rough", 0, 9, {});
    for (auto& d : rough.detections) d.box = {0, 0, 10, 5};

    const auto best = upper_bound_tubelet(gt, {rough, exact});
    CHECK(best.tubelet_id == "exact");
    CHECK(best.viou == 1.0);

    const auto only = upper_bound_tubelet(gt, {rough});
    CHECK(only.tubelet_id == "rough");

    CHECK_THROWS_AS(upper_bound_tubelet(gt, {}), stvg::DataError);

    // Dominance over any proposal evaluated the same way.
    std::mt19937_64 rng(71);
    for (int round = 0; round < 50; ++round) {
        std::vector<Tubelet> pool;
        for (int i = 0; i < 4; ++i) {
            const int start = static_cast<int>(rng() % 10);
            Tubelet t = boxed_tubelet("t" + std::to_string(i), start,
                                      start + 2 + static_cast<int>(rng() % 10), {});
            for (auto& d : t.detections) {
                const double x = static_cast<double>(rng() % 20);
                d.box = {x, 0, x + 10, 10};
            }
            pool.push_back(std::move(t));
        }
        const auto bound = upper_bound_tubelet(gt, pool);
        for (const Tubelet& t : pool) {
            CHECK(viou_metric(t, gt) <= bound.viou);
        }
    }
}

TEST_CASE("shift classification follows the midpoint rule") {
    const auto right = shift_classify({5, 15, 1.0}, {7, 17, 1.0}, TrimSide::start);
    CHECK(right.shift == ShiftDirection::right);

    const auto none = shift_classify({5, 15, 1.0}, {5, 15, 1.0}, TrimSide::start);
    CHECK(none.shift == ShiftDirection::none);

    const auto left = shift_classify({5, 15, 1.0}, {3, 13, 1.0}, TrimSide::start);
    CHECK(left.shift == ShiftDirection::left);

    // A sub-epsilon move counts as none; epsilon itself is a shift.
    CHECK(shift_classify({0, 10, 1.0}, {0, 10, 1.0}, TrimSide::end, 0.5).shift ==
          ShiftDirection::none);
    CHECK(shift_classify({0, 10, 1.0}, {1, 10, 1.0}, TrimSide::end, 0.5).shift ==
          ShiftDirection::right);
}

TEST_CASE("shift report tallies incorrect percentages per side") {
    std::vector<ShiftRecord> all_correct = {{TrimSide::start, ShiftDirection::right},
                                            {TrimSide::end, ShiftDirection::left}};
    const auto clean = shift_report(all_correct);
    CHECK(clean.start_trim.incorrect_pct() == 0.0);
    CHECK(clean.end_trim.incorrect_pct() == 0.0);

    // 13 incorrect of 20 start-trims: exactly 65%.
    std::vector<ShiftRecord> mixed;
    for (int i = 0; i < 7; ++i) mixed.push_back({TrimSide::start, ShiftDirection::right});
    for (int i = 0; i < 9; ++i) mixed.push_back({TrimSide::start, ShiftDirection::left});
    for (int i = 0; i < 4; ++i) mixed.push_back({TrimSide::start, ShiftDirection::none});
    const auto report = shift_report(mixed);
    CHECK(report.start_trim.total == 20);
    CHECK(report.start_trim.incorrect == 13);
    CHECK(report.start_trim.incorrect_pct() == 65.0);
    CHECK(report.start_trim.wrong_direction == 9);
    CHECK(report.start_trim.wrong_direction_pct() == 45.0);

    std::vector<ShiftRecord> all_none = {{TrimSide::end, ShiftDirection::none},
                                         {TrimSide::end, ShiftDirection::none}};
    CHECK(shift_report(all_none).end_trim.incorrect_pct() == 100.0);

    CHECK_THROWS_AS(shift_report({}), stvg::DataError);
}
