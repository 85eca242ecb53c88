#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "stvg/grounding.hpp"
#include "stvg/types.hpp"

namespace stvg {

/// Temporal localization score: frame-set intersection over union.
inline double tiou_metric(const TemporalSpan& pred, const TemporalSpan& gt) {
    return temporal_iou(pred, gt);
}

/**
 * Volumetric IoU: per-frame box IoU summed over the intersection of the
 * predicted and ground-truth spans, divided by the union frame count.
 * Intersection frames without a predicted box contribute 0 and are tallied
 * into missing_pred_boxes when a counter is supplied.
 */
inline double viou_metric(const Tubelet& pred,
                          const TemporalSpan& pred_span,
                          const GroundTruthAnnotation& gt,
                          std::size_t* missing_pred_boxes = nullptr) {
    const int su = span_union_frames(pred_span, gt.span);
    const int lo = std::max(pred_span.start, gt.span.start);
    const int hi = std::min(pred_span.end, gt.span.end);
    if (lo > hi) {
        return 0.0;
    }
    std::map<int, const BBox*> pred_boxes;
    for (const Detection& d : pred.detections) {
        pred_boxes.emplace(d.frame, &d.box);
    }
    double sum = 0.0;
    for (int frame = lo; frame <= hi; ++frame) {
        const auto pit = pred_boxes.find(frame);
        if (pit == pred_boxes.end()) {
            if (missing_pred_boxes) {
                ++*missing_pred_boxes;
            }
            continue;
        }
        const auto git = gt.boxes.find(frame);
        if (git == gt.boxes.end()) {
            continue;
        }
        sum += box_iou(*pit->second, git->second);
    }
    return sum / static_cast<double>(su);
}

inline double viou_metric(const Tubelet& pred, const GroundTruthAnnotation& gt,
                          std::size_t* missing_pred_boxes = nullptr) {
    return viou_metric(pred, pred.span(), gt, missing_pred_boxes);
}

/// Fraction of samples with vIoU strictly greater than r.
inline double viou_at_r(const std::vector<double>& vious, double r) {
    if (vious.empty()) {
        throw DataError("viou_at_r: empty sample list");
    }
    if (r <= 0.0 || r >= 1.0) {
        throw ConfigError("viou_at_r: r must lie in (0, 1)");
    }
    std::size_t above = 0;
    for (double v : vious) {
        if (v > r) {
            ++above;
        }
    }
    return static_cast<double>(above) / static_cast<double>(vious.size());
}

struct SampleEval {
    std::string video_id;
    double tiou = 0.0;
    double viou = 0.0;
};

struct EvalResult {
    double m_tiou = 0.0;
    double m_viou = 0.0;
    double viou_at_01 = 0.0;
    double viou_at_03 = 0.0;
    double viou_at_05 = 0.0;
    std::size_t n_samples = 0;
};

inline EvalResult aggregate_eval(const std::vector<SampleEval>& samples) {
    if (samples.empty()) {
        throw DataError("aggregate_eval: no samples");
    }
    EvalResult result;
    result.n_samples = samples.size();
    std::vector<double> vious;
    for (const SampleEval& s : samples) {
        result.m_tiou += s.tiou;
        result.m_viou += s.viou;
        vious.push_back(s.viou);
    }
    result.m_tiou /= static_cast<double>(samples.size());
    result.m_viou /= static_cast<double>(samples.size());
    result.viou_at_01 = viou_at_r(vious, 0.1);
    result.viou_at_03 = viou_at_r(vious, 0.3);
    result.viou_at_05 = viou_at_r(vious, 0.5);
    return result;
}

/// Detection-level oracle: on every ground-truth frame pick the detection
/// with maximal box IoU against the target box; frames without detections
/// contribute 0. The spans coincide, so this is the mean over the gt span.
inline double upper_bound_detection(const GroundTruthAnnotation& gt,
                                    const std::map<int, std::vector<Detection>>& frames) {
    double sum = 0.0;
    for (int frame = gt.span.start; frame <= gt.span.end; ++frame) {
        const auto git = gt.boxes.find(frame);
        const auto fit = frames.find(frame);
        if (git == gt.boxes.end() || fit == frames.end()) {
            continue;
        }
        double best = 0.0;
        for (const Detection& d : fit->second) {
            best = std::max(best, box_iou(d.box, git->second));
        }
        sum += best;
    }
    return sum / static_cast<double>(gt.span.length());
}

struct TubeletUpperBound {
    std::string tubelet_id;
    double viou = 0.0;
};

/// Tubelet-level oracle: the proposal with maximal vIoU against the ground
/// truth, each evaluated with its own span as the prediction.
inline TubeletUpperBound upper_bound_tubelet(const GroundTruthAnnotation& gt,
                                             const std::vector<Tubelet>& tubelets) {
    if (tubelets.empty()) {
        throw DataError("upper_bound_tubelet: no tubelets");
    }
    std::vector<const Tubelet*> candidates;
    std::vector<double> scores;
    for (const Tubelet& t : tubelets) {
        candidates.push_back(&t);
        scores.push_back(viou_metric(t, gt));
    }
    const std::size_t best = detail::best_candidate_index(candidates, scores);
    return {candidates[best]->id, scores[best]};
}

enum class TrimSide { start, end };

inline const char* to_string(TrimSide s) { return s == TrimSide::start ? "start" : "end"; }

inline TrimSide trim_side_from_string(const std::string& s) {
    if (s == "start") return TrimSide::start;
    if (s == "end") return TrimSide::end;
    throw DataError("unknown trim side '" + s + "'");
}

enum class ShiftDirection { left, right, none };

inline const char* to_string(ShiftDirection d) {
    switch (d) {
        case ShiftDirection::left: return "left";
        case ShiftDirection::right: return "right";
        default: return "none";
    }
}

struct ShiftRecord {
    TrimSide trim_side;
    ShiftDirection shift;
};

/// Classify how the temporal midpoint moved after trimming an action off the
/// query: |delta| < eps_frames counts as no shift.
inline ShiftRecord shift_classify(const TemporalSpan& full_pred,
                                  const TemporalSpan& trimmed_pred,
                                  TrimSide trim_side,
                                  double eps_frames = 0.5) {
    const double delta = trimmed_pred.midpoint() - full_pred.midpoint();
    ShiftDirection shift = ShiftDirection::none;
    if (std::abs(delta) >= eps_frames) {
        shift = delta > 0.0 ? ShiftDirection::right : ShiftDirection::left;
    }
    return {trim_side, shift};
}

struct ShiftSideStats {
    std::size_t total = 0;
    std::size_t incorrect = 0;        // wrong direction or no shift
    std::size_t wrong_direction = 0;  // opposite direction only
    std::size_t none = 0;

    double incorrect_pct() const {
        return total == 0 ? 0.0 : (100.0 * static_cast<double>(incorrect)) / total;
    }
    double wrong_direction_pct() const {
        return total == 0 ? 0.0 : (100.0 * static_cast<double>(wrong_direction)) / total;
    }
};

struct ShiftReport {
    ShiftSideStats start_trim;
    ShiftSideStats end_trim;
};

/// Per-side tallies of incorrect midpoint shifts. The correct direction is
/// right for start-trimming and left for end-trimming; "none" counts as
/// incorrect, with the opposite-direction-only tally reported alongside.
inline ShiftReport shift_report(const std::vector<ShiftRecord>& records) {
    if (records.empty()) {
        throw DataError("shift_report: no records");
    }
    ShiftReport report;
    for (const ShiftRecord& r : records) {
        ShiftSideStats& side =
            r.trim_side == TrimSide::start ? report.start_trim : report.end_trim;
        const ShiftDirection correct =
            r.trim_side == TrimSide::start ? ShiftDirection::right : ShiftDirection::left;
        ++side.total;
        if (r.shift == ShiftDirection::none) {
            ++side.none;
        }
        if (r.shift != correct) {
            ++side.incorrect;
            if (r.shift != ShiftDirection::none) {
                ++side.wrong_direction;
            }
        }
    }
    return report;
}

}  // namespace stvg
